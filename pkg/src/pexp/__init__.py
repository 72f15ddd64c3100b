"""Numerical laboratory for p-exponential prior measures.

Modules
-------
univariate     the one-dimensional p-exponential distribution
sequences      coefficient vectors, scaling sequences and sequence norms
measure        prior sampling and empirical checks of measure properties
concentration  the concentration function: exact approximation term,
               Monte Carlo small balls, complexity-bound functions
rates          closed-form contraction-rate and minimax calculators
models         white noise and density estimation posteriors
experiments    contraction sweeps, inequality batteries, result emission
"""

from . import concentration, experiments, measure, models, rates, sequences, univariate

__all__ = [
    "concentration",
    "experiments",
    "measure",
    "models",
    "rates",
    "sequences",
    "univariate",
]

__version__ = "0.1.0"
