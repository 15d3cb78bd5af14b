import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diracgeom import cartan_quasi as cq, group_geometry as gg, quadratic_lie as ql

GROUPS = ["so3", "su2", "sl2r", "so5"]


def G(name):
    return gg.make_group(name)


def pts(name, n, seed=0):
    r = np.random.default_rng(seed)
    return [gg.sample_point(r, G(name)) for _ in range(n)]


def rodrigues(axis, t):
    K = gg.hat(axis)
    return np.eye(3) + np.sin(t) * K + (1 - np.cos(t)) * K @ K


def vee(X):
    return np.array([X[2, 1], X[0, 2], X[1, 0]])


def test_exp_zero_is_identity():
    for name in GROUPS + ["abelian(2)"]:
        g = G(name)
        p = gg.GroupPoint.exp(g, np.zeros(g.dim))
        assert np.allclose(p.payload, g.identity(), atol=0)


def test_so3_half_turn():
    p = gg.GroupPoint.exp(G("so3"), np.pi * np.array([0.0, 0.0, 1.0]))
    assert np.allclose(p.payload, rodrigues([0, 0, 1], np.pi), atol=1e-15)
    assert np.allclose(p.payload, np.diag([-1.0, -1.0, 1.0]), atol=1e-15)


def test_so3_exp_matches_rodrigues(rng):
    for _ in range(20):
        u = rng.normal(size=3)
        t = np.linalg.norm(u)
        # exp(u) is rotation by -|u| about u/|u|
        ref = rodrigues(u / t, -t)
        assert np.allclose(gg.GroupPoint.exp(G("so3"), u).payload, ref, atol=1e-13)


def test_conj_by_identity(rng):
    for name in GROUPS:
        g = G(name)
        h = gg.sample_point(rng, g)
        e = gg.GroupPoint.identity(g)
        assert np.allclose(e.conj(h).payload, h.payload, atol=1e-15)


def test_Ad_at_identity():
    for name in GROUPS + ["abelian(3)"]:
        e = gg.GroupPoint.identity(G(name))
        assert np.array_equal(e.Ad(), np.eye(e.dim))


def test_so3_Ad_of_rotation_by_conjugation():
    for t in [0.3, 1.0, 2.5]:
        R = gg.rot_z(t)
        ref = np.stack([vee(R @ gg.hat(e) @ R.T) for e in np.eye(3)], axis=1)
        p = gg.GroupPoint(G("so3"), R)
        assert np.allclose(p.Ad(), ref, atol=1e-15)
        assert np.allclose(p.Ad(), R, atol=1e-15)


def test_sl2r_Ad_by_conjugation(rng):
    E = [np.diag([1.0, -1.0]), np.array([[0.0, 1], [1, 0]]), np.array([[0.0, 1], [-1, 0]])]
    flat = np.stack([e.ravel() for e in E], axis=1)
    for p in pts("sl2r", 10):
        g = p.payload
        gi = np.linalg.inv(g)
        ref = np.stack([np.linalg.lstsq(flat, (g @ e @ gi).ravel(), rcond=None)[0] for e in E], axis=1)
        assert np.allclose(p.Ad(), ref, atol=1e-12 * np.abs(ref).max())


def test_su2_double_cover(rng):
    for p in pts("su2", 10):
        q = p.payload
        qc = q * np.array([1, -1, -1, -1])
        # rotate the basis vectors as pure quaternions
        ref = np.stack([gg.quat_mul(gg.quat_mul(q, np.r_[0.0, e]), qc)[1:] for e in np.eye(3)], axis=1)
        assert np.allclose(p.Ad(), ref, atol=1e-14)
        minus = gg.GroupPoint(G("su2"), -q)
        assert np.allclose(minus.Ad(), p.Ad(), atol=1e-15)


@pytest.mark.parametrize("name", GROUPS)
def test_Ad_preserves_form(name):
    B = G(name).algebra.B
    for p in pts(name, 200):
        A = p.Ad()
        assert np.max(np.abs(A.T @ B @ A - B)) <= 1e-10 * max(1, np.abs(A).max()) ** 2


@pytest.mark.parametrize("name", GROUPS)
def test_Ad_homomorphism_and_inverse(name):
    r = np.random.default_rng(7)
    g = G(name)
    for _ in range(100):
        a, b = gg.sample_point(r, g), gg.sample_point(r, g)
        lhs, rhs = (a * b).Ad(), a.Ad() @ b.Ad()
        assert np.max(np.abs(lhs - rhs)) <= 1e-10 * max(1, np.abs(rhs).max())
        u = r.uniform(-1, 1, g.dim)
        e = gg.GroupPoint.exp(g, u) * gg.GroupPoint.exp(g, -u)
        assert np.max(np.abs(np.asarray(e.payload) - g.identity())) <= 1e-12


def test_constraint_violation_rejected():
    with pytest.raises(ValueError):
        gg.GroupPoint(G("so3"), 1.1 * np.eye(3))
    p = gg.GroupPoint(G("so3"), np.eye(3) + 1e-8)
    assert p.constraint() <= 1e-14


def test_unknown_group():
    with pytest.raises(KeyError):
        gg.make_group("e8")


def test_derive_constant_is_zero(rng):
    c = gg.Coeffs.const(np.arange(4.0))
    p = pts("so3", 1)[0]
    assert np.array_equal(gg.derive(c, p, rng.normal(size=3)), np.zeros(4))


@pytest.mark.parametrize("name", GROUPS)
def test_derive_Ad_exact_rule(name):
    # d/dt Ad_{exp(tv) g} = -ad_v Ad_g under the exp convention of the module
    alg = G(name).algebra
    A = gg.Coeffs(lambda at: at.A, "ad_polynomial")
    Ai = gg.Coeffs(lambda at: at.Ai, "ad_polynomial")
    r = np.random.default_rng(3)
    for p in pts(name, 5):
        v = r.uniform(-1, 1, alg.dim)
        ex = gg.derive(A, p, v, "exact")
        assert np.allclose(ex, -gg.BRACKET_SIGN * alg.ad(v) @ p.Ad(), atol=1e-12 * np.abs(p.Ad()).max())
        fd = gg.derive(A, p, v, "fd", 1e-5)
        assert np.max(np.abs(ex - fd)) <= 1e-8 * max(1, np.abs(p.Ad()).max())
        fdi = gg.derive(Ai, p, v, "fd", 1e-5)
        assert np.max(np.abs(gg.derive(Ai, p, v, "exact") - fdi)) <= 1e-8 * max(1, np.abs(p.Ad()).max())


def test_derive_generic_sin_entry(rng):
    c = gg.Coeffs(lambda at: np.sin(3 * at.g[0, 1]), "generic")
    for p in pts("so3", 5):
        v = rng.normal(size=3)
        # d/dt g(t) = -hat(v) g
        ref = 3 * np.cos(3 * p.payload[0, 1]) * (-gg.hat(v) @ p.payload)[0, 1]
        assert abs(gg.derive(c, p, v) - ref) <= 1e-8
    with pytest.raises(ValueError):
        gg.derive(c, pts("so3", 1)[0], np.ones(3), "exact")


def test_bracket_of_right_fields():
    e = np.eye(3)
    p = pts("so3", 1)[0]
    X, Y = gg.Coeffs.const(e[0]), gg.Coeffs.const(e[1])
    assert np.allclose(gg.lie_bracket_fields(X, Y)(p), e[2], atol=1e-15)


def test_bracket_of_left_fields():
    e = np.eye(3)
    for p in pts("so3", 3):
        br = gg.lie_bracket_fields(gg.left_field(e[0]), gg.left_field(e[1]))(p)
        assert np.allclose(br, -gg.left_field(e[2])(p), atol=1e-14)


def test_bracket_left_commutes_with_right():
    e = np.eye(3)
    for name in ["so3", "sl2r"]:
        for p in pts(name, 3):
            br = gg.lie_bracket_fields(gg.Coeffs.const(e[0]), gg.left_field(e[1]))(p)
            assert np.max(np.abs(br)) <= 1e-12 * max(1, np.abs(p.Ad()).max())


def test_bracket_leibniz_with_entry_function():
    e = np.eye(3)
    f = gg.Coeffs(lambda at: at.A[0, 2], "ad_polynomial")
    fX = gg.Coeffs(lambda at: at.A[0, 2] * e[0], "ad_polynomial")
    Y = gg.Coeffs.const(e[1])
    for p in pts("so3", 3):
        lhs = gg.lie_bracket_fields(fX, Y, method="fd")(p)
        Yf = gg.derive(f, p, e[1])
        rhs = f(p) * gg.lie_bracket_fields(gg.Coeffs.const(e[0]), Y)(p) - Yf * e[0]
        assert np.allclose(lhs, rhs, atol=1e-9)


def _field(M, u):
    return gg.Coeffs(lambda at: M @ (at.A @ u) + (at.Ai @ u) * 0.5, "ad_polynomial")


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.sampled_from(["so3", "sl2r"]))
def test_bracket_jacobi(seed, name):
    r = np.random.default_rng(seed)
    p = gg.sample_point(r, G(name))
    X, Y, Z = [_field(r.normal(size=(3, 3)), r.normal(size=3)) for _ in range(3)]
    br = gg.lie_bracket_fields
    terms = [br(X, br(Y, Z))(p), br(Y, br(Z, X))(p), br(Z, br(X, Y))(p)]
    scale = max(np.abs(t).max() for t in terms)
    assert scale > 1e-3
    assert np.max(np.abs(sum(terms))) <= 1e-8 * max(1, scale)


def test_d_of_constant_one_form(rng):
    xi = rng.normal(size=3)
    w = gg.Coeffs.const(xi)
    C = ql.so3().c
    for p in pts("so3", 3):
        u, v = rng.normal(size=3), rng.normal(size=3)
        assert gg.exterior_derivative(w, p, [u, v]) == pytest.approx(-xi @ np.einsum("a,b,abk->k", u, v, C), abs=1e-13)


@pytest.mark.parametrize("name", ["so3", "so5"])
def test_cartan_three_form_closed(name):
    phi = ql.cartan_data(G(name).algebra).phi
    w = gg.Coeffs.const(phi)
    p = pts(name, 1)[0]
    d = G(name).dim
    r = np.random.default_rng(0)
    for _ in range(5):
        vs = [r.normal(size=d) for _ in range(4)]
        assert abs(gg.exterior_derivative(w, p, vs)) <= 1e-12


def test_d_squared_zero():
    e = np.eye(3)
    w = gg.Coeffs(lambda at: at.A @ e[0] + at.Ai.T @ e[2], "ad_polynomial")
    dw = gg.Coeffs(lambda at: gg.exterior_derivative_tensor(w, at), "generic")
    p = pts("so3", 1)[0]
    T = gg.exterior_derivative_tensor(w, p)
    assert np.allclose(T, -T.T, atol=1e-14)
    ddw = gg.exterior_derivative_tensor(dw, p, "fd", 1e-4)
    assert np.max(np.abs(ddw)) <= 1e-6


def test_schouten_constant_on_abelian(rng):
    W = rng.normal(size=(4, 4))
    P = np.linalg.inv(W - W.T)
    g = G("abelian(4)")
    assert np.max(np.abs(gg.schouten_square(gg.Coeffs.const(P), gg.GroupPoint.exp(g, rng.normal(size=4))))) == 0.0


def test_schouten_constant_matches_cyclic_brackets(rng):
    # ½ tri(df, dg, dh) = {f,{g,h}} + cyclic for matrix-entry functions on SO(3)
    M = rng.normal(size=(3, 3))
    P = M - M.T
    g = G("so3")
    p = gg.sample_point(rng, g)
    tri = gg.schouten_square(gg.Coeffs.const(P), p)
    e = np.eye(3)

    def dentry(x, ij):
        return np.array([(-gg.hat(a) @ x)[ij] for a in e])

    def pb(ij, kl, x):
        return dentry(x, ij) @ P @ dentry(x, kl)

    def d_pb(ij, kl, x, a, h=1e-5):
        xp = gg.GroupPoint.exp(g, h * e[a]).payload @ x
        xm = gg.GroupPoint.exp(g, -h * e[a]).payload @ x
        return (pb(ij, kl, xp) - pb(ij, kl, xm)) / (2 * h)

    x = p.payload
    entries = list(itertools.product(range(3), range(3)))
    for f, gg_, hh in itertools.islice(itertools.combinations(entries, 3), 0, 84, 7):
        lhs = 0.0
        for a, b, c in [(f, gg_, hh), (gg_, hh, f), (hh, f, gg_)]:
            grad = np.array([d_pb(b, c, x, k) for k in range(3)])
            lhs += dentry(x, a) @ P @ grad
        rhs = 0.5 * np.einsum("abc,a,b,c->", tri, dentry(x, f), dentry(x, gg_), dentry(x, hh))
        assert lhs == pytest.approx(rhs, abs=1e-7)


def test_conjugacy_tangent():
    e = gg.GroupPoint.identity(G("so3"))
    assert gg.conjugacy_tangent(e).dim == 0
    for p in pts("so3", 10):
        assert gg.conjugacy_tangent(p).dim == 2
        ev = np.linalg.eigvals(p.Ad())
        assert 3 - np.sum(np.abs(ev - 1) < 1e-9) == 2
    a = G("abelian(3)")
    assert gg.conjugacy_tangent(gg.GroupPoint.exp(a, np.ones(3))).dim == 0


def test_trivialize(rng):
    e = gg.GroupPoint.identity(G("sl2r"))
    x = rng.normal(size=3)
    assert np.array_equal(gg.trivialize(e, x), x)
    for p in pts("sl2r", 5):
        for kind in ["vector", "covector"]:
            y = gg.trivialize(p, x, kind, "left_to_right")
            assert np.allclose(gg.trivialize(p, y, kind, "right_to_left"), x, atol=1e-10 * max(1, np.abs(p.Ad()).max()))
        # pairing is frame independent
        a = rng.normal(size=3)
        assert gg.trivialize(p, a, "covector") @ gg.trivialize(p, x) == pytest.approx(a @ x, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("name", ["so3", "sl2r"])
def test_mixed_frame_bivector(name):
    # 1/2 sum_ab B^ab e_a^l ^ e_b^r in right components
    Bi = G(name).algebra.Binv
    for p in pts(name, 5):
        A = p.Ad()
        left = [A @ a for a in np.eye(3)]
        P = np.zeros((3, 3))
        for a, b in itertools.product(range(3), repeat=2):
            P += 0.5 * Bi[a, b] * (np.outer(left[a], np.eye(3)[b]) - np.outer(np.eye(3)[b], left[a]))
        assert np.allclose(P, cq.quasi_poisson_bivector(p), atol=1e-12 * np.abs(A).max() ** 2)


def test_product_group_block_Ad(rng):
    g = gg.make_group("so3*abelian(2)")
    p = gg.sample_point(rng, g)
    A = p.Ad()
    assert A.shape == (5, 5)
    assert np.array_equal(A[3:, 3:], np.eye(2)) and not np.any(A[:3, 3:])
