"""Independent brute-force oracles shared by the module and acceptance tests.

These deliberately avoid the package's solver machinery: the projection
solver is checked against plain projected subgradient descent on the raw
objective, vectorized across instances and restarts.
"""

import numpy as np


def projected_subgradient_batch(ws, cs, epss, ps, iters=10**6, restarts=3, seed=0):
    """Best objective value of min sum c|h|^p s.t. ||h - w||_2 <= eps, per instance.

    Instances are padded to a common dimension with zero weight and zero
    center, which leaves both the objective and the projection unchanged,
    and stacked with the restarts into one flat array so each iteration is a
    handful of vectorized operations.  Geometric step decay drives the
    iterates to the optimum; the best feasible value seen is returned
    (projected iterates are always feasible).
    """
    rng = np.random.default_rng(seed)
    n_inst = len(ws)
    dim = max(len(w) for w in ws)
    rows = n_inst * restarts
    W = np.zeros((n_inst, dim))
    C = np.zeros((n_inst, dim))
    for i, (w, c) in enumerate(zip(ws, cs)):
        W[i, : len(w)] = w
        C[i, : len(c)] = c
    W = np.repeat(W, restarts, axis=0)
    C = np.repeat(C, restarts, axis=0)
    E = np.repeat(np.asarray(epss, dtype=float), restarts)[:, None]
    P = np.repeat(np.asarray(ps, dtype=float), restarts)[:, None]
    Pm1 = P - 1.0
    CP = C * P
    scale0 = np.abs(W).max(axis=1, keepdims=True) + E

    H = W + rng.normal(size=(rows, dim)) * scale0
    H[::restarts] = W[::restarts]
    if restarts > 1:
        H[1::restarts] = 0.0

    def project(H):
        D = H - W
        nrm2 = np.einsum("ij,ij->i", D, D)[:, None]
        shrink = np.minimum(1.0, E / np.sqrt(np.maximum(nrm2, 1e-300)))
        return W + D * shrink

    def objective(H):
        return (C * np.abs(H) ** P).sum(axis=1)

    H = project(H)
    best = objective(H)
    step = scale0.copy()
    decay = (1e-12) ** (1.0 / iters)
    absH = np.empty_like(H)
    for k in range(iters):
        np.abs(H, out=absH)
        np.maximum(absH, 1e-300, out=absH)
        G = CP * np.sign(H) * absH**Pm1
        H -= step * G
        H = project(H)
        step *= decay
        if k % 16 == 0:
            np.minimum(best, objective(H), out=best)
    np.minimum(best, objective(H), out=best)
    return best.reshape(n_inst, restarts).min(axis=1)
