import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diracgeom import cartan_quasi as cq, correspondence as co, dirac_linear as dl, group_geometry as gg
from diracgeom import groupoid_amm as ga

GROUPS = ["so3", "su2", "sl2r"]


def rng_(seed=0):
    return np.random.default_rng(seed)


def test_arithmetic_examples():
    G = gg.make_group("so3")
    r = rng_()
    x, g, h = (gg.sample_point(r, G) for _ in range(3))
    a = ga.Arrow(g, h.conj(x))
    b = ga.Arrow(h, x)
    ab = a * b
    assert np.allclose(ab.g.payload, (g * h).payload, atol=1e-15)
    assert ab.x is x
    assert ga.arrow_distance(ga.mul(ga.unit(b.target()), b), b) <= 1e-15
    assert ga.arrow_distance(ga.inv(ga.inv(b)), b) <= 1e-15
    assert np.allclose(ab.target().payload, (g * h).conj(x).payload, atol=1e-14)


def test_not_composable():
    r = rng_(1)
    a, b = ga.sample_arrow(r, gg.make_group("so3")), ga.sample_arrow(r, gg.make_group("so3"))
    assert not ga.composable(a, b)
    with pytest.raises(ga.CompositionError):
        a * b
    with pytest.raises(ValueError):
        ga.Arrow(gg.GroupPoint.identity(gg.make_group("so3")), gg.GroupPoint.identity(gg.make_group("su2")))


@pytest.mark.parametrize("name", GROUPS)
def test_groupoid_axioms(name):
    for t in ga.sample_composable(rng_(2), gg.make_group(name), 100):
        assert max(ga.groupoid_axioms(*t, relative=True).values()) <= 1e-10


def test_source_target_differentials():
    # compare with central differences along exp curves
    G = gg.make_group("so3")
    a = ga.sample_arrow(rng_(3), G)
    h = 1e-6
    for i in range(6):
        V = np.eye(6)[:, i]
        def arrow(t):
            return ga.Arrow(gg.GroupPoint.exp(G, t * V[:3]) * a.g, gg.GroupPoint.exp(G, t * V[3:]) * a.x)
        T = [arrow(s).target().payload for s in (h, -h)]
        dT = (T[0] - T[1]) / (2 * h) @ np.linalg.inv(a.target().payload)
        # right coordinates w of dT: the curve exp(t w) y has derivative -hom(w) y
        H = np.stack([-G.hom(e).ravel() for e in np.eye(3)], axis=1)
        w = np.linalg.lstsq(H, dT.ravel(), rcond=None)[0]
        assert np.allclose(w, ga.d_target(a) @ V, atol=1e-8)


def test_amm_form_skew_and_abelian():
    for name in GROUPS + ["so5"]:
        a = ga.sample_arrow(rng_(4), gg.make_group(name))
        W = ga.amm_form(a)
        assert np.max(np.abs(W + W.T)) <= 1e-12 * max(1.0, np.abs(W).max())
    G = gg.make_group("abelian(3)")
    a = ga.Arrow(gg.GroupPoint.exp(G, [1.0, 2.0, 3.0]), gg.GroupPoint.exp(G, [0.5, 0, -1]))
    B = G.algebra.B
    Z = np.zeros((3, 3))
    # Ad = id leaves 1/2 <dg ^ 2 dx> = <dg ^ dx>
    assert np.allclose(ga.amm_form(a), np.block([[Z, B], [-B, Z]]), atol=0)


def test_amm_form_units_vanish_on_units():
    for name in GROUPS:
        u = ga.unit(gg.sample_point(rng_(5), gg.make_group(name)))
        W = ga.amm_form(u)
        assert np.allclose(W[3:, 3:], 0.0, atol=0)


@pytest.mark.parametrize("name", ["so3", "su2"])
def test_multiplicativity(name):
    r = rng_(6)
    G = gg.make_group(name)
    worst = 0.0
    for a, b, _ in ga.sample_composable(r, G, 100):
        worst = max(worst, ga.multiplicativity_check(a, b))
    assert worst <= 1e-9
    x = gg.sample_point(r, G)
    assert ga.multiplicativity_check(ga.unit(x), ga.unit(x)) <= 1e-15


def test_multiplicativity_sl2r_relative():
    for a, b, _ in ga.sample_composable(rng_(7), gg.make_group("sl2r"), 100):
        assert ga.multiplicativity_check(a, b, relative=True) <= 1e-9


def test_multiplicativity_so5():
    for a, b, _ in ga.sample_composable(rng_(8), gg.make_group("so5"), 10):
        assert ga.multiplicativity_check(a, b) <= 1e-9


def test_multiplicativity_ablation():
    worst = max(ga.multiplicativity_check(a, b, ablate=True)
                for a, b, _ in ga.sample_composable(rng_(9), gg.make_group("so3"), 10))
    assert worst > 1e-2


def test_multiplicativity_noncomposable():
    r = rng_(10)
    G = gg.make_group("so3")
    with pytest.raises(ga.CompositionError):
        ga.multiplicativity_check(ga.sample_arrow(r, G), ga.sample_arrow(r, G))


@pytest.mark.parametrize("name", GROUPS + ["so5"])
def test_presymplectic_axioms(name):
    r = rng_(11)
    G = gg.make_group(name)
    n = 5 if name == "so5" else 20
    for _ in range(n):
        rep = ga.presymplectic_axioms(ga.sample_arrow(r, G))
        assert rep["dimension"] == (2 * G.dim, G.dim)
        assert rep["kernel_ok"]
        assert rep["closure_rel"] <= 1e-8
        if name != "sl2r":
            assert rep["closure"] <= 1e-8


def test_presymplectic_kernel_at_units():
    for name in GROUPS:
        r = rng_(12)
        for _ in range(50):
            assert ga.presymplectic_axioms(ga.unit(gg.sample_point(r, gg.make_group(name))))["kernel_ok"]


def test_presymplectic_twist_sign():
    a = ga.sample_arrow(rng_(13), gg.make_group("so3"))
    good = ga.presymplectic_axioms(a, twist=-1.0)
    bad = ga.presymplectic_axioms(a, twist=+1.0)
    assert good["closure"] <= 1e-10 and bad["closure"] > 1e-2


def test_presymplectic_fd_path():
    a = ga.sample_arrow(rng_(14), gg.make_group("so3"))
    assert ga.presymplectic_axioms(a, method="fd")["closure"] <= 1e-6


def test_presymplectic_abelian():
    G = gg.make_group("abelian(3)")
    rep = ga.presymplectic_axioms(ga.Arrow(gg.GroupPoint.exp(G, [1, 2, 3]), gg.GroupPoint.exp(G, [3, 2, 1])))
    assert rep["closure"] == 0.0 and rep["scale"] == 0.0 and rep["kernel_ok"]


def test_presymplectic_ablation_breaks_closure():
    a = ga.sample_arrow(rng_(15), gg.make_group("so3"))
    assert ga.presymplectic_axioms(a, ablate=True)["closure"] > 1e-2


@pytest.mark.parametrize("name", GROUPS + ["so5"])
def test_im_of_omega_is_cartan_sigma(name):
    r = rng_(16)
    n = 10 if name == "so5" else 50
    for _ in range(n):
        x = gg.sample_point(r, gg.make_group(name))
        res = ga.im_of_omega(x)
        s = max(1.0, np.abs(x.Ad()).max())
        assert res["sigma_diff"] <= 1e-8 * s and res["anchor_diff"] <= 1e-12 * s
        assert res["distance"] <= 1e-8


def test_im_of_omega_identity():
    G = gg.make_group("so3")
    res = ga.im_of_omega(gg.GroupPoint.identity(G))
    assert np.allclose(res["anchor"], 0.0, atol=0) and np.allclose(res["sigma"], G.algebra.B)
    assert res["distance"] <= 1e-12


def test_im_of_omega_ablation():
    x = gg.sample_point(rng_(17), gg.make_group("so3"))
    # the Ad_x term has no (g, x) block, so the induced sigma survives ablation
    assert ga.im_of_omega(x, ablate=True)["sigma_diff"] <= 1e-12


@pytest.mark.parametrize("name", GROUPS)
def test_action_compat(name):
    r = rng_(18)
    G = gg.make_group(name)
    x = gg.sample_point(r, G)
    for _ in range(20):
        rep = ga.action_compat_check(x, gg.sample_point(r, G))
        assert rep["class_dim"] == 2
        assert rep["form_rel"] <= 1e-8 and rep["dirac"] <= 1e-8
        if name != "sl2r":
            assert rep["form"] <= 1e-8


def test_action_compat_quarter_turn_class():
    G = gg.make_group("so3")
    x = gg.GroupPoint(G, gg.rot_z(np.pi / 2))
    r = rng_(19)
    for _ in range(50):
        assert ga.action_compat_check(x, gg.sample_point(r, G))["form"] <= 1e-8
    rep = ga.action_compat_check(x, gg.GroupPoint.identity(G))
    assert rep["form"] <= 1e-14


def test_action_compat_so5_and_ablation():
    r = rng_(20)
    G = gg.make_group("so5")
    x = gg.sample_point(r, G)
    rep = ga.action_compat_check(x, gg.sample_point(r, G))
    assert rep["form"] <= 1e-8 and rep["dirac"] <= 1e-8
    G = gg.make_group("so3")
    x = gg.GroupPoint(G, gg.rot_z(1.0))
    assert ga.action_compat_check(x, gg.sample_point(r, G), ablate=True)["form"] > 1e-2


def test_action_compat_abelian():
    G = gg.make_group("abelian(2)")
    rep = ga.action_compat_check(gg.GroupPoint.exp(G, [1, 1]), gg.GroupPoint.exp(G, [0.3, 2]))
    assert rep["class_dim"] == 0 and rep["form"] == 0.0


def test_isotropy():
    G = gg.make_group("so3")
    V, cov = ga.isotropy(gg.GroupPoint.identity(G))
    assert V.shape == (3, 3)
    x = gg.GroupPoint(G, gg.rot_z(0.8))
    V, cov = ga.isotropy(x)
    # at a generic rotation the isotropy is the rotation axis
    assert V.shape == (3, 1) and abs(abs(V[2, 0]) - np.linalg.norm(V)) <= 1e-12
    assert np.allclose(cq.structure_maps(x).rho @ V, 0.0, atol=1e-12)
    V, _ = ga.isotropy(gg.GroupPoint.exp(gg.make_group("abelian(2)"), [1.0, -1.0]))
    assert V.shape == (2, 2)


@pytest.mark.parametrize("name", GROUPS)
def test_orbit_reduce(name):
    x = gg.sample_point(rng_(21), gg.make_group(name))
    assert abs(np.linalg.det(x.Ad() + np.eye(3))) > 1e-3
    for s in ga.orbit_reduce_demo(x, range(10)):
        assert s.kernel_dim == 0
        assert s.kernel_match <= 1e-8
        assert s.reduced.f_dirac and s.reduced.b_dirac
        assert dl.check_lagrangian(s.reduced.L.space)["pass"]


def test_orbit_reduce_identity():
    G = gg.make_group("so3")
    e = gg.GroupPoint.identity(G)
    for s in ga.orbit_reduce_demo(e, range(5)):
        p = s.point
        assert s.isotropy.shape == (3, 3)
        # orbit directions are rho_N(g) inside the level set
        assert s.orbit_dirs.equals(dl.Subspace.span(p.rho_M))
        assert s.kernel_dim == 0 and s.reduced.L.base_dim == 1


def test_orbit_reduce_abelian():
    G = gg.make_group("abelian(2)")
    x = gg.GroupPoint.exp(G, [0.3, 0.1])
    for s in ga.orbit_reduce_demo(x, range(3), k=3):
        assert s.isotropy.shape == (2, 2)
        assert s.reduced.L.base_dim == 1 and s.kernel_dim == 0


def test_reduce_non_regular():
    p = co.synth_realization(0, "so3")
    q = co.RealizationPoint(p.g, np.zeros_like(p.dJ), pi=p.pi, rho_M=p.rho_M)
    with pytest.raises(dl.ReductionError):
        ga.reduce_point(q)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.sampled_from(GROUPS))
def test_multiplicativity_property(seed, name):
    (a, b, c), = ga.sample_composable(rng_(seed), gg.make_group(name), 1)
    assert ga.multiplicativity_check(a, b, relative=True) <= 1e-9
    assert max(ga.groupoid_axioms(a, b, c, relative=True).values()) <= 1e-10
