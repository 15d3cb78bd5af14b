"""Pointwise correspondence between hamiltonian quasi-Poisson data and Dirac
realizations of the Cartan-Dirac structure.

Quasi-Poisson side at y in N over g = J(y):  P (pi components, pi-sharp = P^T),
rho_M (n x d, columns are generators), dJ (d x n).
Dirac side: a LinearDirac L on T_yN together with dJ.
"""

import json

import numpy as np
from scipy.linalg import null_space

from . import cartan_quasi as cq
from . import dirac_linear as dl
from . import group_geometry as gg


class InvariantError(ValueError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


class SolveError(ValueError):
    pass


class RealizationPoint:
    """Pointwise data of J: N -> G.  Either (pi, rho_M) or L is set."""

    def __init__(self, g, dJ, pi=None, rho_M=None, L=None):
        self.g = g
        self.dJ = np.asarray(dJ, dtype=float)
        self.n_dim = self.dJ.shape[1]
        self.pi = None if pi is None else np.asarray(pi, dtype=float)
        self.rho_M = None if rho_M is None else np.asarray(rho_M, dtype=float)
        self.L = L
        if self.dJ.shape[0] != g.dim:
            raise InvariantError("dJ must have %d rows" % g.dim)

    @property
    def side(self):
        return "quasi" if self.pi is not None else "dirac"

    @property
    def group(self):
        return self.g.group

    def maps(self):
        return cq.structure_maps(self.g)


class QuasiHamiltonianPoint:
    def __init__(self, g, dJ, omega, rho_M):
        self.g = g
        self.dJ = np.asarray(dJ, dtype=float)
        self.omega = np.asarray(omega, dtype=float)
        self.rho_M = np.asarray(rho_M, dtype=float)
        self.n_dim = self.dJ.shape[1]


def double(g):
    """G itself with pi_G, the conjugation action and J = id."""
    return RealizationPoint(g, np.eye(g.dim), cq.quasi_poisson_bivector(g), cq.structure_maps(g).rho)


def quasi_invariants(p):
    m = p.maps()
    P, R, dJ = p.pi, p.rho_M, p.dJ
    return {
        "skew": float(np.max(np.abs(P + P.T), initial=0.0)),
        "equivariance": float(np.max(np.abs(dJ @ R - m.rho), initial=0.0)),
        "moment": float(np.max(np.abs(P.T @ dJ.T - R @ m.sigma_vee), initial=0.0)),
    }


def _require_quasi(p, tol):
    if p.pi is None or p.rho_M is None:
        raise InvariantError("quasi-Poisson data required")
    res = quasi_invariants(p)
    if max(res.values()) > tol:
        raise InvariantError("quasi-Poisson invariants violated", res)
    return res


def operator_C(p):
    return cq.operator_C(p.rho_M, p.dJ, p.g)["C"]


def anchor_and_form(p):
    """Matrices of r and s on A = T*N + g (columns: n covector slots, then d)."""
    m = p.maps()
    C = operator_C(p)
    r = np.hstack([p.pi.T, p.rho_M])
    s = np.hstack([C.T, p.dJ.T @ m.sigma])
    return r, s


def direct_construct(p, tol=1e-9):
    _require_quasi(p, tol)
    r, s = anchor_and_form(p)
    S = dl.Subspace.span(np.vstack([r, s]))
    if S.dim != p.n_dim:
        raise InvariantError("image of (r, s) has dimension %d, expected %d" % (S.dim, p.n_dim))
    return dl.LinearDirac(S)


def _solve_unique(M, rhs, nvar, tol):
    sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    res = float(np.max(np.abs(M @ sol - rhs), initial=0.0))
    if res > tol * max(1.0, float(np.max(np.abs(rhs), initial=0.0))):
        raise SolveError("no solution (residual %.3g)" % res)
    N = null_space(M, rcond=tol)
    if N.shape[1] and np.max(np.abs(N[:nvar])) > tol:
        raise SolveError("solution is not unique (slack dimension %d)" % N.shape[1])
    return sol[:nvar], res


def _membership_system(L, dJ):
    n = L.base_dim
    X, Al = L.X, L.alpha
    k = X.shape[1]
    d = dJ.shape[0]
    # unknowns (V, c): X c - V = 0, Al c = alpha, dJ V = target
    M = np.block([[-np.eye(n), X], [np.zeros((n, n)), Al], [dJ, np.zeros((d, k))]])
    return M


def inverse_action(L, dJ, g, v, tol=1e-9):
    """The unique V with dJ V = rho(v) and (V, J^* sigma(v)) in L."""
    m = cq.structure_maps(g)
    dJ = np.asarray(dJ, float)
    n = L.base_dim
    M = _membership_system(L, dJ)
    rhs = np.concatenate([np.zeros(n), dJ.T @ m.sigma @ v, m.rho @ v])
    V, _ = _solve_unique(M, rhs, n, tol)
    return V


def inverse_rho(L, dJ, g, tol=1e-9):
    d = g.dim
    return np.stack([inverse_action(L, dJ, g, e, tol) for e in np.eye(d)], axis=1)


def inverse_bivector(L, dJ, g, rho_M=None, tol=1e-9):
    """pi from L: pi-sharp(a) = X with dJ X = -(rho_M sigma_vee)^* a and (X, C^* a) in L.
    Returns P with P[i, j] = pi(e^i, e^j)."""
    dJ = np.asarray(dJ, float)
    if rho_M is None:
        rho_M = inverse_rho(L, dJ, g, tol)
    m = cq.structure_maps(g)
    n = L.base_dim
    C = cq.operator_C(rho_M, dJ, g)["C"]
    M = _membership_system(L, dJ)
    cols = []
    for a in np.eye(n):
        rhs = np.concatenate([np.zeros(n), C.T @ a, -(rho_M @ m.sigma_vee).T @ a])
        X, _ = _solve_unique(M, rhs, n, tol)
        cols.append(X)
    sharp = np.stack(cols, axis=1)
    return sharp.T


def inverse_construct(q, tol=1e-9):
    rho_M = inverse_rho(q.L, q.dJ, q.g, tol)
    P = inverse_bivector(q.L, q.dJ, q.g, rho_M, tol)
    return RealizationPoint(q.g, q.dJ, pi=P, rho_M=rho_M)


def lucky_residual(L, dJ, g, rho_M):
    """max |rho_M^*(a) + sigma^* dJ(X)| over a basis of L."""
    m = cq.structure_maps(g)
    return float(np.max(np.abs(rho_M.T @ L.alpha + m.sigma.T @ dJ @ L.X), initial=0.0))


def exact_sequence(p, tol=1e-9):
    _require_quasi(p, tol)
    m = p.maps()
    n, d = p.n_dim, p.g.dim
    j = np.vstack([-p.dJ.T, m.sigma_vee])
    U = np.hstack([-0.25 * m.rho_vee.T @ p.rho_M.T, m.sigma])
    i = np.block([[np.zeros((n, n)), np.eye(n)], [0.25 * m.rho_vee @ p.dJ, np.zeros((d, n))]])
    r, s = anchor_and_form(p)
    rs = np.vstack([r, s])
    L = direct_construct(p, tol)
    res = {
        "U j = id": float(np.max(np.abs(U @ j - np.eye(d)))),
        "(r,s) i = id on L": float(np.max(np.abs(rs @ i @ L.basis - L.basis))),
        "j U + i (r,s) = id": float(np.max(np.abs(j @ U + i @ rs - np.eye(n + d)))),
    }
    rank = np.linalg.matrix_rank(rs, tol=tol * max(1.0, np.linalg.norm(rs, 2)))
    return {"U": U, "i": i, "j": j, "residuals": res, "rank": int(rank), "pass": max(res.values()) <= tol and rank == n}


def moment_residuals(p, omega=None):
    m = p.maps()
    out = {"equivariance": float(np.max(np.abs(p.dJ @ p.rho_M - m.rho)))}
    if p.pi is not None:
        out["mom2"] = float(np.max(np.abs(p.pi.T @ p.dJ.T - p.rho_M @ m.sigma_vee)))
    if omega is not None:
        omega = np.asarray(omega, float)
        out["mom1"] = float(np.max(np.abs(omega.T @ p.rho_M - p.dJ.T @ m.sigma)))
        kerA = null_space(m.A + np.eye(p.g.dim), rcond=1e-9)
        kw = dl.Subspace.span(null_space(omega, rcond=1e-9))
        kr = dl.Subspace.span(p.rho_M @ kerA) if kerA.size else dl.Subspace.zero(p.n_dim)
        out["kernel"] = float(kw.distance(kr))
    return out


def to_quasi_hamiltonian(p, tol=1e-9):
    """For nondegenerate data: omega = leaf form of direct_construct(p)."""
    L = direct_construct(p, tol)
    ker, rng = dl.kernel_range(L)
    if rng.dim != p.n_dim:
        raise InvariantError("degenerate: range has dimension %d < %d" % (rng.dim, p.n_dim))
    omega = dl.leaf_two_form(L).ambient()
    return QuasiHamiltonianPoint(p.g, p.dJ, omega, p.rho_M)


def nondegeneracy_tests(p, tol=1e-9):
    """Three equivalent characterizations of nondegeneracy."""
    L = direct_construct(p, tol)
    ker, rng = dl.kernel_range(L)
    full_range = rng.dim == p.n_dim
    span = dl.Subspace.span(np.hstack([p.pi.T, p.rho_M])).dim == p.n_dim
    cot = dl.Subspace.span(L.basis).intersect(
        dl.Subspace(np.vstack([np.zeros((p.n_dim, p.n_dim)), np.eye(p.n_dim)]))).dim == 0
    return full_range, span, cot


def roundtrip(p, tol=1e-9):
    """Quasi -> Dirac -> quasi and Dirac -> quasi -> Dirac discrepancies."""
    L = direct_construct(p, tol)
    q = RealizationPoint(p.g, p.dJ, L=L)
    back = inverse_construct(q, tol)
    e1 = max(float(np.max(np.abs(back.pi - p.pi))), float(np.max(np.abs(back.rho_M - p.rho_M))))
    L2 = direct_construct(back, tol)
    e2 = L2.distance(L)
    return {"quasi->dirac->quasi": e1, "dirac->quasi->dirac": float(e2)}


def quasi_map_check(p1, p2, df, tol=1e-8, aut=None):
    """Compare the quasi-Poisson and Dirac descriptions of a map f.

    aut is the differential of a group automorphism a with J2 f = a J1 and
    f(k.y) = a(k).f(y); None means the identity. Conjugation by h on the
    double is the basic example, with df = aut = Ad_h."""
    df = np.asarray(df, float)
    aut = np.eye(p1.group.dim) if aut is None else np.asarray(aut, float)
    c1 = {
        "pi": float(np.max(np.abs(df @ p1.pi.T @ df.T - p2.pi.T))),
        "rho": float(np.max(np.abs(df @ p1.rho_M - p2.rho_M @ aut))),
        "J": float(np.max(np.abs(p2.dJ @ df - aut @ p1.dJ))),
    }
    quasi_ok = max(c1.values()) <= tol
    try:
        L1, L2 = direct_construct(p1), direct_construct(p2)
    except InvariantError:
        # one side is not a quasi-Poisson point, so it has no Dirac description
        return {"quasi": False, "dirac": False, "agree": not quasi_ok, "residuals": c1}
    S, ok = dl.pushforward(L1, df)
    dirac_ok = bool(ok and S.equals(L2.space, tol) and c1["J"] <= tol)
    return {"quasi": quasi_ok, "dirac": dirac_ok, "agree": quasi_ok == dirac_ok, "residuals": c1}


def synth_realization(seed, group, k=2, g=None):
    """Random quasi-Poisson point on N = G x R^k with J the projection.
    If g is given it is used as J(y) instead of a sampled point."""
    if isinstance(group, str):
        group = gg.make_group(group)
    rng = np.random.default_rng(seed)
    if g is None:
        g = gg.sample_point(rng, group)
    m = cq.structure_maps(g)
    d = group.dim
    n = d + k
    Arand = rng.uniform(-1.0, 1.0, (k, d))
    rho_M = np.vstack([m.rho, Arand])
    dJ = np.hstack([np.eye(d), np.zeros((d, k))])
    S = rng.uniform(-1.0, 1.0, (k, k))
    sharp = np.zeros((n, n))
    sharp[:d, :d] = m.rho @ m.sigma_vee
    sharp[d:, :d] = Arand @ m.sigma_vee
    sharp[:d, d:] = -sharp[d:, :d].T
    sharp[d:, d:] = S - S.T
    return RealizationPoint(g, dJ, pi=sharp.T, rho_M=rho_M)


def to_json(p):
    doc = {"group": p.group.name, "g": p.g.tolist(), "n_dim": p.n_dim, "dJ": p.dJ.tolist()}
    if p.pi is not None:
        doc["pi"] = p.pi.tolist()
        doc["rho_M"] = p.rho_M.tolist()
    if p.L is not None:
        doc["L_basis"] = p.L.basis.tolist()
    return json.dumps(doc, sort_keys=True)


class SchemaError(ValueError):
    pass


def from_json(text):
    try:
        doc = json.loads(text) if isinstance(text, str) else text
        group = gg.make_group(doc["group"])
        g = gg.point_from_list(group, doc["g"])
        n = int(doc["n_dim"])
        dJ = np.array(doc["dJ"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError("bad realization document: %s" % exc) from exc
    if dJ.shape != (group.dim, n):
        raise SchemaError("dJ must be %d x %d" % (group.dim, n))
    if "pi" in doc:
        P = np.array(doc["pi"], dtype=float)
        R = np.array(doc.get("rho_M"), dtype=float)
        if P.shape != (n, n) or R.shape != (n, group.dim):
            raise SchemaError("pi / rho_M have wrong shapes")
        if np.max(np.abs(P + P.T)) > 1e-9 * max(1.0, np.max(np.abs(P))):
            raise SchemaError("pi is not skew-symmetric")
        return RealizationPoint(g, dJ, pi=P, rho_M=R)
    if "L_basis" in doc:
        Lb = np.array(doc["L_basis"], dtype=float)
        if Lb.shape[0] != 2 * n:
            raise SchemaError("L_basis must have %d rows" % (2 * n))
        try:
            L = dl.LinearDirac.from_basis(Lb)
        except ValueError as exc:
            raise SchemaError(str(exc)) from exc
        return RealizationPoint(g, dJ, L=L)
    raise SchemaError("document needs pi/rho_M or L_basis")
