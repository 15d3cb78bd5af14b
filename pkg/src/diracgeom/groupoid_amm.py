"""The transformation groupoid G x G for the conjugation action and its AMM 2-form.

An arrow (g, x) goes from x to g x g^-1.  Tangent vectors at (g, x) are pairs
(a, b) of right coordinates, stacked as one vector of length 2d.
"""

import numpy as np
from scipy.linalg import null_space

from . import cartan_quasi as cq
from . import correspondence as co
from . import dirac_linear as dl
from . import group_geometry as gg
from . import quadratic_lie as ql
from .dual import block

COMPOSABLE_TOL = 1e-10


class CompositionError(ValueError):
    pass


def _flat(p):
    return np.concatenate([np.ravel(np.asarray(x, float)) for x in _payloads(p)])


def _payloads(p):
    return list(p.payload) if isinstance(p.group, gg.Product) else [p.payload]


def same_point(p, q, tol=COMPOSABLE_TOL):
    a, b = _flat(p), _flat(q)
    # relative to |x|^2: the det normalisation on noncompact groups cancels that much
    return float(np.max(np.abs(a - b))) <= tol * max(1.0, float(np.max(np.abs(a)))) ** 2


class Arrow:
    def __init__(self, g, x):
        if g.group is not x.group:
            raise ValueError("both components must lie in the same group")
        self.g = g
        self.x = x

    @property
    def group(self):
        return self.g.group

    @property
    def dim(self):
        return self.g.dim

    def source(self):
        return self.x

    def target(self):
        return self.g.conj(self.x)

    def __mul__(self, other):
        return mul(self, other)

    def __repr__(self):
        return "Arrow(g=%r, x=%r)" % (self.g, self.x)


def unit(x):
    return Arrow(gg.GroupPoint.identity(x.group), x)


def composable(a, b, tol=COMPOSABLE_TOL):
    return same_point(a.source(), b.target(), tol)


def mul(a, b, tol=COMPOSABLE_TOL):
    """(g, h x h^-1) . (h, x) = (g h, x)."""
    if not composable(a, b, tol):
        raise CompositionError("source of the left arrow differs from target of the right arrow")
    return Arrow(a.g * b.g, b.x)


def inv(a):
    return Arrow(a.g.inv(), a.target())


def arrow_distance(a, b):
    return max(float(np.max(np.abs(_flat(a.g) - _flat(b.g)))),
               float(np.max(np.abs(_flat(a.x) - _flat(b.x)))))


def groupoid_axioms(a, b, c, relative=False):
    """Residuals of associativity, unit and inverse laws on a composable triple.
    relative=True divides by max(1, |entries|)^2, the roundoff scale of conjugation."""
    out = {
        "associativity": arrow_distance(mul(mul(a, b), c), mul(a, mul(b, c))),
        "left unit": arrow_distance(mul(unit(a.target()), a), a),
        "right unit": arrow_distance(mul(a, unit(a.source())), a),
        "inverse left": arrow_distance(mul(inv(a), a), unit(a.source())),
        "inverse right": arrow_distance(mul(a, inv(a)), unit(a.target())),
        "inv inv": arrow_distance(inv(inv(a)), a),
    }
    if relative:
        size = max(float(np.max(np.abs(_flat(p)))) for t in (a, b, c) for p in (t.g, t.x))
        out = {k: v / max(1.0, size) ** 2 for k, v in out.items()}
    return out


def sample_arrow(rng, group, x=None):
    g = gg.sample_point(rng, group)
    if x is None:
        x = gg.sample_point(rng, group)
    return Arrow(g, x)


def sample_composable(rng, group, n):
    """n composable triples (a, b, c)."""
    out = []
    for _ in range(n):
        c = sample_arrow(rng, group)
        b = sample_arrow(rng, group, c.target())
        a = sample_arrow(rng, group, b.target())
        out.append((a, b, c))
    return out


# differentials in right coordinates

def d_source(a):
    d = a.dim
    return np.hstack([np.zeros((d, d)), np.eye(d)])


def d_target(a):
    d = a.dim
    At = a.target().Ad()
    return np.hstack([np.eye(d) - At, a.g.Ad()])


def composable_tangent(a, b):
    """Basis of T(G2) at (a, b): columns are stacked (V1, V2), each of length 2d.
    Free parameters (a1, a2, b2); b1 = (I - Ad_y) a2 + Ad_h b2 with y = b.target()."""
    d = a.dim
    I, Z = np.eye(d), np.zeros((d, d))
    Ay = b.target().Ad()
    Ah = b.g.Ad()
    V1 = np.vstack([np.hstack([I, Z, Z]), np.hstack([Z, I - Ay, Ah])])
    V2 = np.vstack([np.hstack([Z, I, Z]), np.hstack([Z, Z, I])])
    return V1, V2


def d_mul(a, b):
    """dm(V1, V2) = (a1 + Ad_g a2, b2), as a map on the composable basis."""
    d = a.dim
    I, Z = np.eye(d), np.zeros((d, d))
    return np.vstack([np.hstack([I, a.g.Ad(), Z]), np.hstack([Z, Z, I])])


# the 2-form

def _blocks(B, Ag_inv, Ax, Ax_inv, d, ablate):
    Lg = Ag_inv
    Mx = np.eye(d) + Ax_inv
    K = Lg.T @ B @ Mx
    if ablate:
        T1 = 0.0 * (Lg.T @ Lg)
    else:
        T1 = Lg.T @ (Ax.T @ B - B @ Ax) @ Lg
    return 0.5 * block([[T1, K], [-1.0 * K.T, np.zeros((d, d))]])


def amm_form(a, ablate=False):
    """Components W with omega(V, V') = V^T W V'.

    omega = 1/2 (<Ad_x lambda_g, lambda_g> + <lambda_g, lambda_x + rlambda_x>) with
    lambda the left and rlambda the right Maurer-Cartan form.  ablate drops the
    Ad_x term."""
    B = np.asarray(a.g.algebra.B)
    W = _blocks(B, a.g.Adinv(), a.x.Ad(), a.x.Adinv(), a.dim, ablate)
    return 0.5 * (W - W.T)


def amm_form_coeffs(algebra, ablate=False):
    """amm_form as coefficients on At.of(g, x) (g, x from a non-product group)."""
    B = np.asarray(algebra.B)
    d = algebra.dim

    def fn(at):
        if len(at.As) != 2:
            raise ValueError("expected an evaluation context at a pair (g, x)")
        return _blocks(B, at.Ais[0], at.As[1], at.Ais[1], d, ablate)

    return gg.Coeffs(fn, "ad_polynomial", "amm")


def multiplicativity_check(a, b, ablate=False, relative=False):
    """max |m^*omega - pr1^*omega - pr2^*omega| on a basis of T(G2).

    relative=True divides by the size of the summands, which grows like |Ad|^4
    on noncompact groups."""
    ab = mul(a, b)
    V1, V2 = composable_tangent(a, b)
    Dm = d_mul(a, b)
    W = [amm_form(ab, ablate), amm_form(a, ablate), amm_form(b, ablate)]
    lhs = Dm.T @ W[0] @ Dm
    rhs = V1.T @ W[1] @ V1 + V2.T @ W[2] @ V2
    res = float(np.max(np.abs(lhs - rhs)))
    if not relative:
        return res
    size = max(np.abs(w).max() for w in W) * max(np.abs(m).max() for m in (Dm, V1, V2)) ** 2
    return res / max(1.0, size)


def _pull3(phi, M):
    return np.einsum("abc,ai,bj,ck->ijk", phi, M, M, M)


def d_omega(a, method="auto", h=1e-5, ablate=False):
    at = gg.At.of(a.g, a.x)
    return gg.exterior_derivative_tensor(amm_form_coeffs(a.g.algebra, ablate), at, method, h)


def presymplectic_axioms(a, twist=-1.0, method="auto", h=1e-5, ablate=False):
    """Twisted presymplectic groupoid conditions at an arrow a.

    twist scales the Cartan 3-form phi^G: the closure condition checked is
    d omega = s^*phi - t^*phi with phi = twist * phi^G.  The kernel condition
    is evaluated at the unit over the source of a.  closure_rel divides the
    closure residual by the size of the summands."""
    alg = a.g.algebra
    phi = twist * ql.cartan_data(alg).phi
    dw = d_omega(a, method, h, ablate)
    ds, dt = d_source(a), d_target(a)
    rhs = _pull3(phi, ds) - _pull3(phi, dt)
    closure = float(np.max(np.abs(dw - rhs)))
    W = amm_form(a, ablate)
    size = max(np.abs(phi).max(initial=0.0) * max(np.abs(ds).max(), np.abs(dt).max()) ** 3,
               np.abs(W).max() * max(np.abs(alg.c).max(initial=0.0), 1.0) * np.abs(a.x.Ad()).max())
    u = unit(a.source())
    Wu = amm_form(u, ablate)
    stacked = np.vstack([Wu, d_source(u), d_target(u)])
    d = a.dim
    rank = int(np.linalg.matrix_rank(stacked, tol=1e-9))
    return {
        "dimension": (2 * d, d),
        "dimension_ok": True,
        "kernel_rank": rank,
        "kernel_ok": rank == 2 * d,
        "closure": closure,
        "closure_rel": closure / max(1.0, size),
        "scale": float(np.max(np.abs(rhs), initial=0.0)),
    }


def im_of_omega(x, ablate=False):
    """sigma_omega(v) = i_v omega restricted to the units, v in ker ds at (e, x).
    Returns (sigma_omega matrix, anchor matrix, principal-angle distance of the
    induced Dirac structure from the Cartan-Dirac structure, max |sigma_omega - sigma|)."""
    u = unit(x)
    d = x.dim
    W = amm_form(u, ablate)
    # v = (a, 0), tangent to units = (0, b)
    sig = W[:d, d:].T
    anchor = d_target(u)[:, :d]
    S = dl.Subspace.span(np.vstack([anchor, sig]))
    ref = cq.cartan_dirac(x)
    m = cq.structure_maps(x)
    return {
        "sigma": sig,
        "anchor": anchor,
        "distance": float(S.distance(ref.space)),
        "sigma_diff": float(np.max(np.abs(sig - m.sigma))),
        "anchor_diff": float(np.max(np.abs(anchor - m.rho))),
    }


def _class_form(point):
    """GHJW form on the class through point, as an ambient d x d matrix acting on
    right coordinates (zero off the class tangent)."""
    gh = cq.ghjw(point)
    return gh.R @ gh.theta @ gh.R.T, gh.R


def action_compat_check(x, g, ablate=False):
    """Action of G x G on N = class of x (J the inclusion) at the arrow (g, x).

    Returns the 2-form residual of m_N^* theta - pr_N^* theta - pr^* omega on
    T(G x_G N), and the principal-angle distance between m_N^* L_N and the gauge
    transform of pr_N^* L_N by pr^* omega."""
    a = Arrow(g, x)
    d = x.dim
    th_x, Rx = _class_form(x)
    th_t, Rt = _class_form(a.target())
    c = Rx.shape[1]
    # tangent space: (a, b) with b in T_x(class)
    Wb = np.block([[np.eye(d), np.zeros((d, c))], [np.zeros((d, d)), Rx]])
    pr_N = d_source(a) @ Wb
    m_N = d_target(a) @ Wb
    omega = Wb.T @ amm_form(a, ablate) @ Wb
    lhs = m_N.T @ th_t @ m_N
    rhs = pr_N.T @ th_x @ pr_N + omega
    form_res = float(np.max(np.abs(lhs - rhs)))
    size = max(np.abs(th_t).max() * np.abs(m_N).max() ** 2, np.abs(th_x).max() * np.abs(pr_N).max() ** 2,
               np.abs(omega).max(initial=0.0))
    rel = form_res / max(1.0, size)
    if c == 0:
        return {"form": form_res, "form_rel": rel, "dirac": 0.0, "class_dim": 0}
    Lx = dl.dirac_from_two_form(Rx.T @ th_x @ Rx)
    Lt = dl.dirac_from_two_form(Rt.T @ th_t @ Rt)
    left = dl.pullback(Lt, Rt.T @ m_N)
    right = dl.gauge_transform(dl.pullback(Lx, Rx.T @ pr_N), 0.5 * (omega - omega.T))
    return {"form": form_res, "form_rel": rel, "dirac": float(left.distance(right)), "class_dim": c}


class ReductionSample:
    def __init__(self, point, reduced, isotropy, orbit_dirs, kernel_match):
        self.point = point
        self.reduced = reduced
        self.isotropy = isotropy
        self.orbit_dirs = orbit_dirs
        self.kernel_match = kernel_match

    @property
    def kernel_dim(self):
        return self.reduced.kernel_dim


def isotropy(x, tol=1e-9):
    """l_x = L_G intersected with T*G at x, as {sigma(v) : rho(v) = 0};
    returns the basis of v's and of the covectors."""
    m = cq.structure_maps(x)
    L = cq.cartan_dirac(x)
    d = x.dim
    cot = dl.Subspace(np.vstack([np.zeros((d, d)), np.eye(d)]))
    inter = L.space.intersect(cot)
    cov = inter.basis[d:]
    V = np.linalg.lstsq(m.sigma, cov, rcond=None)[0] if cov.size else np.zeros((d, 0))
    return V, cov


def reduce_point(p, tol=dl.EQUAL_ANGLE):
    """Reduce a realization point over its value x = J(y): level set ker dJ,
    orbit directions rho_N(l_x)."""
    x = p.g
    d = x.dim
    if np.linalg.matrix_rank(p.dJ, tol=1e-9) != d:
        raise dl.ReductionError("x is not a regular value (rank dJ < %d)" % d)
    L_N = p.L if p.L is not None else co.direct_construct(p)
    T_C = dl.Subspace.span(null_space(p.dJ, rcond=1e-9))
    V, _ = isotropy(x)
    if V.size:
        dirs = np.column_stack([co.inverse_action(L_N, p.dJ, x, v) for v in V.T])
        orbit = dl.Subspace.span(dirs)
    else:
        orbit = dl.Subspace.zero(p.n_dim)
    red = dl.linear_reduce(L_N, T_C, orbit, tol)
    return ReductionSample(p, red, V, orbit, red.kernel_match)


def orbit_reduce_demo(x, seeds, k=4, tol=dl.EQUAL_ANGLE):
    """Reduce synthetic realizations N = G x R^k over the fixed value x."""
    return [reduce_point(co.synth_realization(s, x.group, k=k, g=x), tol) for s in seeds]
