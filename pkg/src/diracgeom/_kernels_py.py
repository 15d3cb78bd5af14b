"""numpy versions of the batched kernels in _kernels.pyx."""

import numpy as np


def structure_residuals(A, Ai, B, Binv):
    A = np.asarray(A, float)
    Ai = np.asarray(Ai, float)
    d = A.shape[1]
    I = np.eye(d)
    s = 0.5 * np.einsum("ij,pjk->pik", B, I + A)
    sv = 0.5 * np.einsum("pij,jk->pik", I + Ai, Binv)
    r = I - A
    rv = I - Ai
    tr = lambda X: np.swapaxes(X, 1, 2)
    terms = [
        4 * sv @ s + rv @ r - 4 * I,
        4 * s @ sv + tr(r @ rv) - 4 * I,
        tr(s) @ r + tr(r) @ s,
        s @ rv + tr(rv) @ tr(s),
        rv @ tr(sv) + sv @ tr(rv),
        r @ sv + tr(r @ sv),
    ]
    return np.stack([np.sqrt(np.einsum("pij,pij->p", T, T)) for T in terms], axis=1)


def isotropy_residuals(M):
    M = np.asarray(M, float)
    n = M.shape[1] // 2
    X, a = M[:, :n], M[:, n:]
    G = np.einsum("pai,paj->pij", X, a)
    return np.max(np.abs(G + np.swapaxes(G, 1, 2)), axis=(1, 2), initial=0.0)
