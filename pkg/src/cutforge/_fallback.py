"""Pure numpy implementations of the numerical kernels.

Same signatures as the compiled ``_native`` module. ``edge_terms`` and
``brute_force_maxcut`` reproduce the compiled arithmetic order so both
backends return bit-identical results.
"""

import numpy as np

_CHUNK = 1 << 16


def _sorted_product(F: np.ndarray) -> np.ndarray:
    """Per-column product of ``F`` (shape (n, m)), factors ascending, left to right."""
    F = np.sort(F, axis=0)
    acc = np.ones(F.shape[1])
    for row in F:
        acc *= row
    return acc


def edge_terms(C, S, eu, ev):
    """Gamma-dependent parts of the depth-1 ZZ correlator for every edge.

    ``C`` and ``S`` are ``cos(gamma * W)`` and ``sin(gamma * W)``. Returns
    ``(A, B)`` with ``<Z_u Z_v> = sin(4 beta) * A + sin(2 beta)**2 * B``.
    """
    C = np.asarray(C, dtype=float)
    S = np.asarray(S, dtype=float)
    eu = np.asarray(eu, dtype=np.intp)
    ev = np.asarray(ev, dtype=np.intp)
    m = eu.size
    rows = np.arange(m)

    Cu, Cv = C[eu].copy(), C[ev].copy()
    Su, Sv = S[eu], S[ev]
    cc = Cu * Cv
    ss = Su * Sv
    plus = cc - ss
    minus = cc + ss
    for F in (Cu, Cv, plus, minus):
        F[rows, eu] = 1.0
        F[rows, ev] = 1.0

    pu = _sorted_product(Cu.T)
    pv = _sorted_product(Cv.T)
    qp = _sorted_product(plus.T)
    qm = _sorted_product(minus.T)
    s_uv = S[eu, ev]
    A = -0.5 * s_uv * (pu + pv)
    B = -0.5 * (qp - qm)
    return A, B


def brute_force_maxcut(n, eu, ev, w):
    """Return ``(best value, lowest index attaining it)`` over ``2**(n-1)`` assignments.

    Index bit ``i - 1`` set means node ``i`` sits on the -1 side; node 0 is fixed.
    """
    eu = np.asarray(eu, dtype=np.int64)
    ev = np.asarray(ev, dtype=np.int64)
    w = np.asarray(w, dtype=float)
    total = 1 << (n - 1)
    best_val = -np.inf
    best_idx = 0
    for start in range(0, total, _CHUNK):
        x = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        # node 0 always reads bit 0 of (x << 1), i.e. zero
        y = x << 1
        vals = np.zeros(x.size)
        for a, b, wt in zip(eu, ev, w):
            differ = ((y >> a) ^ (y >> b)) & 1
            vals += np.where(differ == 1, wt, 0.0)
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val = float(vals[k])
            best_idx = int(x[k])
    return best_val, best_idx


def jacobi_eigenvalues(A, tol=1e-12, max_sweeps=100):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending."""
    A = np.array(A, dtype=float)
    n = A.shape[0]
    scale = max(1.0, float(np.linalg.norm(A)))
    for _ in range(max_sweeps):
        off = np.sqrt(max(0.0, float(np.sum(A * A) - np.sum(np.diag(A) ** 2))))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                g = 100.0 * abs(apq)
                if abs(A[p, p]) + g == abs(A[p, p]) and abs(A[q, q]) + g == abs(A[q, q]):
                    # too small to move either diagonal entry; dropping it also keeps theta finite
                    A[p, q] = A[q, p] = 0.0
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                app, aqq = A[p, p], A[q, q]
                colp = A[:, p].copy()
                colq = A[:, q]
                A[:, p] = c * colp - s * colq
                A[:, q] = s * colp + c * colq
                A[p, :] = A[:, p]
                A[q, :] = A[:, q]
                A[p, p] = app - t * apq
                A[q, q] = aqq + t * apq
                A[p, q] = A[q, p] = 0.0
    return np.sort(np.diag(A))
