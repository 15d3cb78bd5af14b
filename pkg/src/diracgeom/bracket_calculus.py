"""Brackets of sections over a group (or product of groups) in the right frame.

Vector fields, 1-forms and functions are Coeffs; every operation here returns
new Coeffs, so brackets can be nested and differentiated again.  Conventions:

    pi-sharp(a)^j = a_i P[i, j]                (P[i, j] = pi(e^i, e^j))
    (L_X a)_b = X(a_b) + a_k D_b X^k - a_k X^a C_ab^k
    (d a)_ab  = D_a a_b - D_b a_a - a_k C_ab^k
    i_{X^Y} phi = phi(X, Y, .)
"""

import numpy as np

from . import group_geometry as gg
from . import quadratic_lie as ql
from .dual import ein, value

Coeffs = gg.Coeffs


def _kind(*cs):
    return gg.join_kind(*[c for c in cs if c is not None])


def zero_form(n):
    return Coeffs.const(np.zeros(n))


def sharp(pi, a):
    return Coeffs(lambda at: ein("i,ij->j", a(at), pi(at)), _kind(pi, a), "sharp")


def pairing(a, X):
    return Coeffs(lambda at: ein("i,i->", a(at), X(at)), _kind(a, X))


def scale(f, c):
    """Product of a scalar function and a tensor field."""
    return Coeffs(lambda at: f(at) * c(at), _kind(f, c))


def add(*cs, signs=None):
    signs = signs or [1.0] * len(cs)

    def fn(at):
        out = None
        for s, c in zip(signs, cs):
            term = c(at) if s == 1.0 else s * c(at)
            out = term if out is None else out + term
        return out

    return Coeffs(fn, _kind(*cs))


def d_function(f):
    return Coeffs(lambda at: gg.derive_frame(f, at), _kind(f), "d")


def lie_function(X, f):
    return Coeffs(lambda at: ein("a,a...->...", X(at), gg.derive_frame(f, at)), _kind(X, f))


def lie_form(X, a):
    def fn(at):
        x, al = X(at), a(at)
        Da = gg.derive_frame(a, at)
        DX = gg.derive_frame(X, at)
        return ein("a,ab->b", x, Da) + ein("k,bk->b", al, DX) - ein("k,a,abk->b", al, x, at.C)

    return Coeffs(fn, _kind(X, a), "L")


def d_form(a):
    def fn(at):
        Da = gg.derive_frame(a, at)
        return Da - Da.T - ein("k,abk->ab", a(at), at.C)

    return Coeffs(fn, _kind(a), "d")


def contract_form2(Y, w):
    """i_Y w = w(Y, .)"""
    return Coeffs(lambda at: ein("a,ab->b", Y(at), w(at)), _kind(Y, w))


def insert_pair(phi, X, Y):
    """i_{X^Y} phi = phi(X, Y, .)"""
    return Coeffs(lambda at: ein("abc,a,b->c", phi(at), X(at), Y(at)), _kind(phi, X, Y))


def vector_bracket(X, Y):
    return gg.lie_bracket_fields(X, Y)


# ---------------------------------------------------------------------------
# bivector brackets

def one_form_bracket(pi, a, b):
    """[a, b] = L_{pi a} b - L_{pi b} a - d pi(a, b)."""
    pa, pb = sharp(pi, a), sharp(pi, b)
    return add(lie_form(pa, b), lie_form(pb, a), d_function(pairing(b, pa)), signs=[1.0, -1.0, -1.0])


def twisted_one_form_bracket(pi, phi, a, b):
    if phi is None:
        return one_form_bracket(pi, a, b)
    return add(one_form_bracket(pi, a, b), insert_pair(phi, sharp(pi, a), sharp(pi, b)))


def courant_bracket(s1, s2, phi=None):
    """([X, Y], L_X b - i_Y d a + i_{X^Y} phi) for s1 = (X, a), s2 = (Y, b)."""
    (X, a), (Y, b) = s1, s2
    vec = vector_bracket(X, Y)
    parts = [lie_form(X, b), contract_form2(Y, d_form(a))]
    signs = [1.0, -1.0]
    if phi is not None:
        parts.append(insert_pair(phi, X, Y))
        signs.append(1.0)
    return vec, add(*parts, signs=signs)


def ident1_residual(pi, a, b, at):
    """pi-sharp[a, b] - [pi a, pi b] + 1/2 tri_pi(a, b, .)"""
    at = gg.as_at(at)
    lhs = value(sharp(pi, one_form_bracket(pi, a, b))(at))
    rhs = value(vector_bracket(sharp(pi, a), sharp(pi, b))(at))
    tri = gg.schouten_square(pi, at)
    ins = np.einsum("abc,a,b->c", tri, value(a(at)), value(b(at)))
    return float(np.max(np.abs(lhs - rhs + 0.5 * ins)))


def form_jacobiator(bracket, a, b, c, at):
    at = gg.as_at(at)
    j = add(bracket(a, bracket(b, c)), bracket(b, bracket(c, a)), bracket(c, bracket(a, b)))
    return value(j(at))


def ident2_residual(pi, a, b, c, at):
    """[a,[b,c]] + c.p. - 1/2 (L_{tri(a,b,.)} c + c.p.) + d tri(a,b,c)"""
    at = gg.as_at(at)
    tri = Coeffs(lambda p: _tri_field(pi, p), "generic" if pi.kind == "generic" else "ad_polynomial")
    jac = form_jacobiator(lambda x, y: one_form_bracket(pi, x, y), a, b, c, at)
    terms = []
    for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
        V = Coeffs(lambda p, x=x, y=y: ein("abc,a,b->c", tri(p), x(p), y(p)), _kind(tri, x, y))
        terms.append(value(lie_form(V, z)(at)))
    full = Coeffs(lambda p: ein("abc,a,b,c->", tri(p), a(p), b(p), c(p)), _kind(tri, a, b, c))
    dterm = value(d_function(full)(at))
    return float(np.max(np.abs(jac - 0.5 * sum(terms) + dterm)))


def _tri_field(pi, at):
    """tri_pi with dual-number support (for differentiating it again)."""
    P = pi(at)
    D = gg.derive_frame(pi, at)
    C = at.C
    T = ein("xb,byz->xyz", P, D) + ein("xb,yd,bdz->xyz", P, P, C)
    half = T + T.transpose(1, 2, 0) + T.transpose(2, 0, 1)
    return 2.0 * half


# ---------------------------------------------------------------------------
# the algebroid T*M + g of a bivector with an action

class Section:
    """(1-form, g-valued function); either part may be None (zero)."""

    def __init__(self, form=None, alg=None):
        self.form = form
        self.alg = alg


class QuasiAlgebroid:
    """Bracket and anchor on T*M + g for a bivector pi and an action rho_M.

    rho_M is a Coeffs returning the n x d matrix whose columns are the
    generators; algebra is the quadratic Lie algebra acting.
    """

    def __init__(self, pi, rho_M, algebra, n):
        self.pi = pi
        self.rho = rho_M
        self.algebra = algebra
        self.n = n
        self.d = algebra.dim
        self.chi = ql.cartan_data(algebra).chi

    def _form(self, s):
        return s.form if s.form is not None else zero_form(self.n)

    def _alg(self, s):
        return s.alg if s.alg is not None else Coeffs.const(np.zeros(self.d))

    def action_field(self, v):
        return Coeffs(lambda at: ein("ij,j->i", self.rho(at), v(at)), _kind(self.rho, v))

    def anchor(self, s):
        return add(sharp(self.pi, self._form(s)), self.action_field(self._alg(s)))

    def A_term(self, vt, mu):
        """A_v(mu)_b = mu_k D_b v^k."""
        return Coeffs(lambda at: ein("k,bk->b", mu(at), gg.derive_frame(vt, at)), _kind(vt, mu))

    def rho_dual(self, a):
        return Coeffs(lambda at: ein("ij,i->j", self.rho(at), a(at)), _kind(self.rho, a))

    def _forms_part(self, a, b):
        ra, rb = self.rho_dual(a), self.rho_dual(b)
        chi = self.chi
        alg = Coeffs(lambda at: 0.5 * ein("ijk,i,j->k", chi, ra(at), rb(at)), _kind(ra, rb))
        return one_form_bracket(self.pi, a, b), alg

    def _mixed(self, vt, a):
        """[(0, v), (a, 0)] = (L_{rho v} a - A_v(rho^* a), -L_{pi a} v)."""
        form = add(lie_form(self.action_field(vt), a), self.A_term(vt, self.rho_dual(a)), signs=[1.0, -1.0])
        alg = Coeffs(lambda at: -1.0 * lie_function(sharp(self.pi, a), vt)(at), _kind(self.pi, a, vt))
        return form, alg

    def _alg_part(self, u, v):
        br = self.algebra.c

        def fn(at):
            uu, vv = u(at), v(at)
            out = ein("i,j,ijk->k", uu, vv, br)
            out = out + lie_function(self.action_field(u), v)(at)
            out = out - lie_function(self.action_field(v), u)(at)
            return out

        return Coeffs(fn, _kind(u, v, self.rho))

    def bracket(self, s1, s2):
        forms, algs = [], []
        if s1.form is not None and s2.form is not None:
            f, g = self._forms_part(s1.form, s2.form)
            forms.append((1.0, f))
            algs.append((1.0, g))
        if s1.alg is not None and s2.form is not None:
            f, g = self._mixed(s1.alg, s2.form)
            forms.append((1.0, f))
            algs.append((1.0, g))
        if s1.form is not None and s2.alg is not None:
            f, g = self._mixed(s2.alg, s1.form)
            forms.append((-1.0, f))
            algs.append((-1.0, g))
        if s1.alg is not None and s2.alg is not None:
            algs.append((1.0, self._alg_part(s1.alg, s2.alg)))
        form = add(*[c for _, c in forms], signs=[s for s, _ in forms]) if forms else None
        alg = add(*[c for _, c in algs], signs=[s for s, _ in algs]) if algs else None
        return Section(form, alg)

    def jacobiator(self, s1, s2, s3, at):
        at = gg.as_at(at)
        br = self.bracket
        terms = [br(s1, br(s2, s3)), br(s2, br(s3, s1)), br(s3, br(s1, s2))]
        form = np.zeros(self.n)
        alg = np.zeros(self.d)
        for t in terms:
            if t.form is not None:
                form = form + value(t.form(at))
            if t.alg is not None:
                alg = alg + value(t.alg(at))
        return float(max(np.max(np.abs(form)), np.max(np.abs(alg))))

    def anchor_residual(self, s1, s2, at):
        at = gg.as_at(at)
        lhs = value(self.anchor(self.bracket(s1, s2))(at))
        rhs = value(vector_bracket(self.anchor(s1), self.anchor(s2))(at))
        return float(np.max(np.abs(lhs - rhs)))


def conjugation_action(algebra):
    """rho(v) = v_r - v_l: right-frame matrix I - Ad_g."""
    I = np.eye(algebra.dim)
    return Coeffs(lambda at: I - at.A, "ad_polynomial", "conj")


def A_identity_residual(qa, mus, at):
    """sum_cyc A_{i_{mu^mu'} chi}(mu'') - 2 d chi(mu, mu', mu'') for g*-valued mu's."""
    at = gg.as_at(at)
    chi = qa.chi
    total = 0.0
    m0, m1, m2 = mus
    for x, y, z in ((m0, m1, m2), (m1, m2, m0), (m2, m0, m1)):
        vt = Coeffs(lambda p, x=x, y=y: ein("ijk,i,j->k", chi, x(p), y(p)), _kind(x, y))
        total = total + value(qa.A_term(vt, z)(at))
    f = Coeffs(lambda p: ein("ijk,i,j,k->", chi, m0(p), m1(p), m2(p)), _kind(m0, m1, m2))
    return float(np.max(np.abs(total - 2.0 * value(d_function(f)(at)))))


# ---------------------------------------------------------------------------
# IM forms

def im_form_check(sigma, anchor, bracket, phi, sections, at):
    """Residuals of the two IM-form axioms on the given sections.

    sigma, anchor: callables section -> Coeffs (1-form / vector field);
    bracket: callable (section, section) -> section; phi: Coeffs 3-form or None.
    """
    at = gg.as_at(at)
    skew = 0.0
    brk = 0.0
    for i, x in enumerate(sections):
        for y in sections[i:]:
            sx, sy, rx, ry = sigma(x), sigma(y), anchor(x), anchor(y)
            p1 = value(pairing(sx, ry)(at))
            p2 = value(pairing(sy, rx)(at))
            skew = max(skew, abs(p1 + p2))
            lhs = value(sigma(bracket(x, y))(at))
            parts = [lie_form(rx, sy), lie_form(ry, sx), d_function(pairing(sx, ry))]
            signs = [1.0, -1.0, 1.0]
            if phi is not None:
                parts.append(insert_pair(phi, rx, ry))
                signs.append(1.0)
            rhs = value(add(*parts, signs=signs)(at))
            brk = max(brk, float(np.max(np.abs(lhs - rhs))))
    return {"skew": float(skew), "bracket": brk}


def phi_G_coeffs(algebra, sign=1.0):
    phi = sign * ql.cartan_data(algebra).phi
    return Coeffs.const(phi, "phi_G")


def cartan_sections(algebra):
    """Spanning sections (v_r - v_l, 1/2 B (v_r + v_l)) for basis vectors v."""
    B = np.asarray(algebra.B)
    out = []
    for a in range(algebra.dim):
        e = np.eye(algebra.dim)[a]
        X = Coeffs(lambda at, e=e: e - at.A @ e, "ad_polynomial")
        al = Coeffs(lambda at, e=e: 0.5 * (B @ (e + at.A @ e)), "ad_polynomial")
        out.append((X, al))
    return out


def courant_closure(point, phi_sign=-1.0):
    """Max Euclidean distance of Courant brackets of Cartan sections from L_G."""
    from .cartan_quasi import cartan_dirac
    alg = point.algebra
    at = gg.At.of(point)
    L = cartan_dirac(point)
    phi = phi_G_coeffs(alg, phi_sign)
    secs = cartan_sections(alg)
    worst = 0.0
    for s1 in secs:
        for s2 in secs:
            X, a = courant_bracket(s1, s2, phi)
            vec = np.concatenate([value(X(at)), value(a(at))])
            worst = max(worst, L.off_component(vec))
    return worst


def cartan_im_check(point, phi_sign=-1.0):
    """IM axioms for sigma on the transformation algebroid g x G (conjugation)."""
    alg = point.algebra
    B = np.asarray(alg.B)
    rho = conjugation_action(alg)
    d = alg.dim
    secs = [Coeffs.const(np.eye(d)[a]) for a in range(d)]
    sigma = lambda v: Coeffs(lambda at: 0.5 * ein("ij,j->i", B, v(at) + ein("ij,j->i", at.A, v(at))),
                             "generic" if v.kind == "generic" else "ad_polynomial")
    anchor = lambda v: Coeffs(lambda at: ein("ij,j->i", rho(at), v(at)), _kind(v, rho))
    bracket = lambda u, v: transformation_bracket(rho, u, v, alg)
    return im_form_check(sigma, anchor, bracket, phi_G_coeffs(alg, phi_sign), secs, gg.At.of(point))


# ---------------------------------------------------------------------------
# transformation algebroids and Lie-Poisson

def transformation_bracket(rho, u, v, algebra):
    """[u, v](x) = [u(x), v(x)] + (rho(u) . v)(x) - (rho(v) . u)(x)."""
    c = algebra.c

    def fn(at):
        uu, vv, R = u(at), v(at), rho(at)
        Xu = ein("ij,j->i", R, uu)
        Xv = ein("ij,j->i", R, vv)
        return (ein("i,j,ijk->k", uu, vv, c)
                + ein("a,ak->k", Xu, gg.derive_frame(v, at))
                - ein("a,ak->k", Xv, gg.derive_frame(u, at)))

    return Coeffs(fn, _kind(u, v, rho))


def lie_poisson_coeffs(algebra):
    """Bivector P(mu)[i, j] = <mu, [e_i, e_j]> on g* (as the vector group R^d)."""
    c = algebra.c
    return Coeffs(lambda at: ein("k,ijk->ij", at.g, c), "ad_polynomial", "lie_poisson")


def lie_poisson(algebra, mu):
    return np.einsum("k,ijk->ij", np.asarray(mu, float), algebra.c)


def coadjoint_anchor(algebra, mu):
    """Matrix whose column u is the coadjoint generator at mu: (mu o ad_u)."""
    return np.einsum("k,ujk->ju", np.asarray(mu, float), algebra.c)


def coadjoint_action(algebra):
    c = algebra.c
    return Coeffs(lambda at: ein("k,ujk->ju", at.g, c), "ad_polynomial", "coadjoint")


def double_im_check(point, phi_sign=-1.0, sections=None):
    """IM axioms for s(a, v) = C^* a + sigma(v) on T*G + g with pi_G, the
    conjugation action and J = id (C = 1 - 1/4 rho rho_vee)."""
    from .cartan_quasi import pi_G_coeffs
    alg = point.algebra
    d = alg.dim
    B = np.asarray(alg.B)
    I = np.eye(d)
    qa = QuasiAlgebroid(pi_G_coeffs(alg), conjugation_action(alg), alg, d)

    def sigma(s):
        a, v = qa._form(s), qa._alg(s)

        def fn(at):
            C = I - 0.25 * (I - at.A) @ (I - at.Ai)
            return ein("ji,j->i", C, a(at)) + 0.5 * ein("ij,j->i", B, v(at) + ein("ij,j->i", at.A, v(at)))

        # depends on Ad even when a and v are constant
        return Coeffs(fn, "generic" if _kind(a, v) == "generic" else "ad_polynomial")

    if sections is None:
        e = np.eye(d)
        sections = []
        for k in range(d):
            sections.append(Section(form=Coeffs.const(e[k])))
            sections.append(Section(alg=Coeffs.const(e[k])))
        sections.append(Section(form=Coeffs(lambda at: at.A @ e[0], "ad_polynomial"),
                                alg=Coeffs(lambda at: at.Ai @ e[d - 1], "ad_polynomial")))
    return im_form_check(sigma, qa.anchor, qa.bracket, phi_G_coeffs(alg, phi_sign), sections, gg.At.of(point))
