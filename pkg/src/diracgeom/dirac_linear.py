"""Subspaces of V and V + V*, and pointwise Dirac structures.

Coordinates on V + V* are (X, alpha) with X first; the split pairing is
<(X, a), (Y, b)> = b(X) + a(Y), matrix [[0, I], [I, 0]].
"""

import numpy as np
from scipy.linalg import null_space, subspace_angles

DEFAULT_TOL = 1e-9
EQUAL_ANGLE = 1e-8


class DimensionError(ValueError):
    pass


class Subspace:
    """Column span of an orthonormal basis (ambient_dim x k)."""

    def __init__(self, basis, tol=DEFAULT_TOL):
        basis = np.asarray(basis, dtype=float)
        if basis.ndim != 2:
            raise DimensionError("basis must be a matrix")
        self.basis = basis
        self.tol = tol
        self.ambient_dim = basis.shape[0]

    @classmethod
    def span(cls, M, tol=DEFAULT_TOL, scale=0.0):
        """Column span.  Singular values below tol * max(s_max, scale) are dropped;
        pass scale=1 when M is a block of an orthonormal basis, so that a block made
        only of roundoff has rank 0.
        """
        M = np.asarray(M, dtype=float)
        if M.ndim == 1:
            M = M[:, None]
        if M.shape[1] == 0 or not np.any(M):
            return cls(np.zeros((M.shape[0], 0)), tol)
        U, s, _ = np.linalg.svd(M, full_matrices=False)
        r = int(np.sum(s > tol * max(s[0], scale)))
        return cls(U[:, :r], tol)

    @classmethod
    def zero(cls, n):
        return cls(np.zeros((n, 0)))

    @classmethod
    def full(cls, n):
        return cls(np.eye(n))

    @property
    def dim(self):
        return self.basis.shape[1]

    def _check(self, other):
        if self.ambient_dim != other.ambient_dim:
            raise DimensionError("ambient dims %d and %d differ" % (self.ambient_dim, other.ambient_dim))

    def sum(self, other):
        self._check(other)
        return Subspace.span(np.hstack([self.basis, other.basis]), self.tol)

    def intersect(self, other):
        self._check(other)
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(self.ambient_dim)
        N = null_space(np.hstack([self.basis, -other.basis]), rcond=self.tol)
        return Subspace.span(self.basis @ N[: self.dim], self.tol)

    def annihilator(self):
        """Annihilator in dual coordinates."""
        if self.dim == 0:
            return Subspace.full(self.ambient_dim)
        return Subspace(null_space(self.basis.T, rcond=self.tol), self.tol)

    def orthogonal_complement(self, form):
        """Complement with respect to a nondegenerate symmetric form."""
        form = np.asarray(form, dtype=float)
        if form.shape != (self.ambient_dim, self.ambient_dim):
            raise DimensionError("form has wrong shape")
        if np.max(np.abs(form - form.T)) > self.tol * max(1.0, np.max(np.abs(form))):
            raise ValueError("form is not symmetric")
        s = np.linalg.svd(form, compute_uv=False)
        if s.min() <= self.tol * s.max():
            raise ValueError("degenerate form")
        if self.dim == 0:
            return Subspace.full(self.ambient_dim)
        return Subspace(null_space((form @ self.basis).T, rcond=self.tol), self.tol)

    def quotient_basis(self, sub):
        """Orthonormal basis of a complement of sub inside self."""
        self._check(sub)
        if not self.contains(sub):
            raise ValueError("not a subspace")
        if sub.dim == 0:
            return self.basis
        coords = self.basis.T @ sub.basis
        Q = null_space(coords.T, rcond=self.tol)
        return self.basis @ Q

    def project(self, x):
        return self.basis @ (self.basis.T @ x)

    def contains(self, other, tol=EQUAL_ANGLE):
        self._check(other)
        if other.dim == 0:
            return True
        if self.dim == 0:
            return False
        return float(np.max(np.abs(other.basis - self.project(other.basis)))) <= tol

    def distance(self, other):
        """Largest principal angle; inf if dimensions differ."""
        self._check(other)
        if self.dim != other.dim:
            return np.inf
        if self.dim == 0:
            return 0.0
        return float(np.max(subspace_angles(self.basis, other.basis)))

    def equals(self, other, tol=EQUAL_ANGLE):
        return self.distance(other) <= tol

    def __repr__(self):
        return "Subspace(dim=%d in R^%d)" % (self.dim, self.ambient_dim)


class SplitPairing:
    def __init__(self, n):
        self.n = n
        Z, I = np.zeros((n, n)), np.eye(n)
        self.matrix = np.block([[Z, I], [I, Z]])

    def __call__(self, a, b):
        return a @ self.matrix @ b


def split_pairing(n):
    return SplitPairing(n)


def check_lagrangian(s, p=None, tol=1e-12):
    n = s.ambient_dim // 2
    if p is None:
        p = SplitPairing(n)
    M = s.basis.T @ p.matrix @ s.basis
    res = float(np.max(np.abs(M), initial=0.0))
    deficit = n - s.dim
    return {"residual": res, "dim": s.dim, "deficit": deficit,
            "pass": bool(res <= tol and deficit == 0)}


class LinearDirac:
    """A Lagrangian subspace of V + V*."""

    def __init__(self, space, n=None, check=True, tol=1e-9):
        if not isinstance(space, Subspace):
            space = Subspace.span(space)
        if n is None:
            n = space.ambient_dim // 2
        if space.ambient_dim != 2 * n:
            raise DimensionError("ambient dimension must be 2n")
        self.base_dim = n
        self.space = space
        if check:
            rep = check_lagrangian(space, tol=tol)
            if not rep["pass"]:
                raise ValueError("not Lagrangian: residual %.3g, dim %d of %d"
                                 % (rep["residual"], space.dim, n))

    @classmethod
    def from_basis(cls, M, check=True, tol=1e-9):
        return cls(Subspace.span(M), check=check, tol=tol)

    @property
    def basis(self):
        return self.space.basis

    @property
    def X(self):
        return self.space.basis[: self.base_dim]

    @property
    def alpha(self):
        return self.space.basis[self.base_dim:]

    def equals(self, other, tol=EQUAL_ANGLE):
        return self.space.equals(other.space, tol)

    def distance(self, other):
        return self.space.distance(other.space)

    def contains(self, vec, tol=1e-9):
        vec = np.asarray(vec, dtype=float)
        return float(np.max(np.abs(vec - self.space.project(vec)))) <= tol * max(1.0, np.max(np.abs(vec)))

    def off_component(self, vec):
        """Euclidean distance of vec from the subspace."""
        vec = np.asarray(vec, dtype=float)
        return float(np.linalg.norm(vec - self.space.project(vec)))

    def __repr__(self):
        return "LinearDirac(n=%d)" % self.base_dim


def _skew_check(M, what, tol=1e-9):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError("%s must be square" % what)
    if np.max(np.abs(M + M.T), initial=0.0) > tol * max(1.0, np.max(np.abs(M), initial=0.0)):
        raise ValueError("%s is not skew-symmetric" % what)
    return M


def dirac_from_bivector(P):
    """Graph of pi-sharp, with P[i, j] = pi(e^i, e^j); pi-sharp(a) = P^T a."""
    P = _skew_check(P, "bivector")
    n = P.shape[0]
    return LinearDirac(Subspace.span(np.vstack([P.T, np.eye(n)])))


def dirac_from_two_form(W):
    """Graph of omega-sharp, omega(X, Y) = X^T W Y; omega-sharp(X) = W^T X."""
    W = _skew_check(W, "two-form")
    n = W.shape[0]
    return LinearDirac(Subspace.span(np.vstack([np.eye(n), W.T])))


def _null(M, tol, scale=1.0):
    _, s, Vt = np.linalg.svd(M)
    r = int(np.sum(s > tol * max(s[0] if s.size else 0.0, scale)))
    return Vt[r:].T


def kernel_range(L):
    n = L.base_dim
    X, A = L.X, L.alpha
    tol = L.space.tol
    rng = Subspace.span(X, tol, scale=1.0)
    c = _null(A, tol) if L.space.dim else np.zeros((0, 0))
    ker = Subspace.span(X @ c, tol, scale=1.0) if c.size else Subspace.zero(n)
    return ker, rng


class LeafForm:
    """Skew form on range(L), in an orthonormal basis R of the range."""

    def __init__(self, R, theta, residual):
        self.R = R
        self.theta = theta
        self.residual = residual

    def __call__(self, x, y):
        return (self.R.T @ x) @ self.theta @ (self.R.T @ y)

    def ambient(self):
        """Extension by zero on the orthogonal complement of the range."""
        return self.R @ self.theta @ self.R.T

    def on(self, vecs):
        """Gram matrix on the columns of vecs (assumed in the range)."""
        C = self.R.T @ vecs
        return C.T @ self.theta @ C


def leaf_two_form(L):
    _, rng = kernel_range(L)
    R = rng.basis
    if R.shape[1] == 0:
        return LeafForm(R, np.zeros((0, 0)), 0.0)
    X, A = L.X, L.alpha
    c, *_ = np.linalg.lstsq(X, R, rcond=None)
    solve_res = float(np.max(np.abs(X @ c - R)))
    alphas = A @ c
    theta = alphas.T @ R
    skew_res = float(np.max(np.abs(theta + theta.T)))
    return LeafForm(R, 0.5 * (theta - theta.T), max(solve_res, skew_res))


def gauge_transform(L, B):
    B = _skew_check(B, "gauge form")
    X, A = L.X, L.alpha
    return LinearDirac(Subspace.span(np.vstack([X, A + B.T @ X])))


def pushforward(L, A, tol=1e-9):
    """{(A Y, a) : (Y, A^T a) in L}.  Returns (Subspace, is_dirac)."""
    A = np.asarray(A, dtype=float)
    n, m = A.shape
    if m != L.base_dim:
        raise DimensionError("map domain %d does not match %d" % (m, L.base_dim))
    Y, Bn = L.X, L.alpha
    k = Y.shape[1]
    N = null_space(np.hstack([Bn, -A.T]), rcond=tol)
    img = np.vstack([A @ Y @ N[:k], N[k:]])
    S = Subspace.span(img, tol)
    ok = check_lagrangian(S, tol=1e-9)["pass"] if S.ambient_dim == 2 * n else False
    return S, bool(ok)


def pushforward_dirac(L, A, tol=1e-9):
    S, ok = pushforward(L, A, tol)
    if not ok:
        raise ValueError("forward image is not a Dirac structure")
    return LinearDirac(S, check=False)


def pullback(L, A, tol=1e-9):
    """{(Y, A^T a) : (A Y, a) in L}; always Lagrangian."""
    A = np.asarray(A, dtype=float)
    n, m = A.shape
    if n != L.base_dim:
        raise DimensionError("map target %d does not match %d" % (n, L.base_dim))
    X, Al = L.X, L.alpha
    N = null_space(np.hstack([A, -X]), rcond=tol)
    img = np.vstack([N[:m], A.T @ Al @ N[m:]])
    return LinearDirac(Subspace.span(img, tol), n=m)


def realization_check(L_N, dJ, L_M, tol=EQUAL_ANGLE):
    S, ok = pushforward(L_N, dJ)
    forward = bool(ok and S.equals(L_M.space, tol))
    ker, _ = kernel_range(L_N)
    nd = Subspace.span(null_space(np.asarray(dJ, float))) if np.asarray(dJ).size else Subspace.full(L_N.base_dim)
    nondeg = nd.intersect(ker).dim == 0
    return {"forward": forward, "nondegenerate": bool(nondeg), "distance": S.distance(L_M.space)}


class Reduced:
    def __init__(self, L, Q, pulled, kernel_match, f_dirac, b_dirac):
        self.L = L
        self.Q = Q
        self.pulled = pulled
        self.kernel_match = kernel_match
        self.f_dirac = f_dirac
        self.b_dirac = b_dirac

    @property
    def kernel_dim(self):
        return kernel_range(self.L)[0].dim


class ReductionError(ValueError):
    pass


def linear_reduce(L_N, T_C, orbit_dirs, tol=EQUAL_ANGLE):
    """Pull back to T_C, then push forward along T_C -> T_C / orbit_dirs.

    T_C and orbit_dirs are subspaces of R^m.  The reduced space is coordinatized
    by an orthonormal complement of orbit_dirs inside T_C.
    """
    if not T_C.contains(orbit_dirs):
        raise ReductionError("orbit directions are not tangent to the level set")
    Tb = T_C.basis
    pulled = pullback(L_N, Tb)
    ker, _ = kernel_range(pulled)
    orbit_c = Subspace.span(Tb.T @ orbit_dirs.basis)
    match = ker.distance(orbit_c)
    if not match <= tol:
        raise ReductionError("kernel of the pulled-back structure differs from the orbit directions "
                             "(angle %.3g)" % match)
    Qc = Subspace.full(T_C.dim).quotient_basis(orbit_c)
    q = Qc.T
    S, ok = pushforward(pulled, q)
    if not ok:
        raise ReductionError("reduced subspace is not Lagrangian")
    red = LinearDirac(S, check=False)
    back = pullback(red, q)
    return Reduced(red, Tb @ Qc, pulled, match, ok, back.equals(pulled, tol))
