"""Program data model: dualization, feasibility systems, weak duality."""

import numpy as np
import pytest

import oracles
from conedual import cones, gallery, program, solver
from conedual.spaces import LinearMap, inner, real, space


def _lp(seed=0, n=3, m=3):
    rng = np.random.default_rng([seed, 21])
    amat = rng.standard_normal((m, n))
    dom, cod = space(real(n)), space(real(m))
    return program.ConicProgram(
        A=LinearMap(dom, cod, amat), b=rng.standard_normal(m),
        c=rng.standard_normal(n), K=cones.cone(cod, cones.NONNEG),
        C=cones.cone(dom, cones.NONNEG), sense="sup")


def test_dualize_involution():
    for seed in range(5):
        p = gallery.random_program("mixed", seed=seed)
        dd = program.dualize(program.dualize(p))
        assert np.allclose(dd.A.matrix, p.A.matrix)
        assert np.allclose(dd.b, p.b)
        assert np.allclose(dd.c, p.c)
        assert dd.K.tags == p.K.tags and dd.C.tags == p.C.tags
        assert dd.sense == p.sense


def test_dualize_textbook_lp():
    # sup{c x : A x <= b, x >= 0} pairs with inf{b y : A* y >= c, y >= 0}
    p = _lp(seed=3)
    d = program.dualize(p)
    assert d.sense == "inf"
    assert np.allclose(d.A.matrix, p.A.matrix.T)
    assert d.K.tags == (cones.NONNEG,)  # dual of C = Nonneg
    assert d.C.tags == (cones.NONNEG,)  # dual of K = Nonneg
    assert np.allclose(d.b, p.c) and np.allclose(d.c, p.b)


def test_dual_optimum_matches_primal_oracle():
    # LP duality: when the primal oracle value is finite, the dual program
    # written as a sup has oracle value of opposite sign
    hits = 0
    for seed in range(12):
        p = _lp(seed=seed)
        st, val = oracles.lp_value(p)
        d = program.dualize(p)
        neg = program.ConicProgram(A=LinearMap(d.A.domain, d.A.codomain,
                                               -d.A.matrix),
                                   b=-d.b, c=-d.c, K=d.K, C=d.C, sense="sup")
        std, vald = oracles.lp_value(neg)
        if st == "optimal":
            assert std == "optimal"
            assert np.isclose(val, -vald, atol=1e-7)
            hits += 1
        elif st == "unbounded":
            assert std == "infeasible"
    assert hits >= 3


def test_feasible_system_matches_point_test():
    rng = np.random.default_rng([4, 22])
    for seed in range(5):
        p = gallery.planted_strong_duality(
            [(cones.NONNEG, 3)], [(cones.NONNEG, 2)], seed=seed)
        gmap, g, kc = program.feasible_system(p)
        for _ in range(10):
            x = rng.standard_normal(3)
            assert program.is_feasible_point(p, x) == cones.member(kc, gmap(x) + g)


def test_weak_duality_on_planted_pairs():
    for seed in range(20):
        p = gallery.planted_strong_duality(
            [(cones.NONNEG, 2), (cones.SOC, 3)], [(cones.NONNEG, 3)], seed=seed)
        # the planted construction points are feasible by construction
        xs = gallery._sample_relint(p.C, gallery._rng(seed, gallery._STREAM_X0))
        ys = gallery._sample_relint(cones.dual(p.K), gallery._rng(seed, gallery._STREAM_Y0))
        gap = program.weak_duality_check(p, xs, ys)
        assert gap >= -1e-6


def test_weak_duality_rejects_infeasible_points():
    p = _lp(seed=1)
    with pytest.raises(ValueError):
        program.weak_duality_check(p, 1e6 * np.ones(3), np.zeros(3))


def test_complementary_slackness_at_optimum():
    p = gallery.planted_strong_duality(
        [(cones.NONNEG, 3)], [(cones.NONNEG, 3)], seed=9)
    res = solver.solve(p)
    assert res.status == "Optimal"
    r1, r2 = program.complementary_slackness(p, res.x, res.y)
    assert abs(r1) <= 1e-5 and abs(r2) <= 1e-5


def test_paired_maps_adjoints():
    p = _lp(seed=5)
    pm = program.paired_maps(p)
    rng = np.random.default_rng([5, 24])
    u = rng.standard_normal(pm.Lp.domain.dim)
    v = rng.standard_normal(pm.Lp.codomain.dim)
    assert np.isclose(inner(pm.Lp(u), v), inner(pm.Lp_adjoint(v), u))
    # Lp*(y, w) = (A* y - w, <b, y>)
    m, n = p.A.codomain.dim, p.A.domain.dim
    y, w = v[:m], v[m:]
    out = pm.Lp_adjoint(v)
    assert np.allclose(out[:n], p.A.matrix.T @ y - w)
    assert np.isclose(out[n], inner(p.b, y))
    # Ld*(x, s) = (A x + s, <c, x>)
    z = rng.standard_normal(pm.Ld.codomain.dim)
    x, s = z[:n], z[n:]
    out = pm.Ld_adjoint(z)
    assert np.allclose(out[:m], p.A.matrix @ x + s)
    assert np.isclose(out[m], inner(p.c, x))


def test_dual_via_basis_same_optimum():
    p = gallery.planted_strong_duality(
        [(cones.NONNEG, 3)], [(cones.NONNEG, 3)], seed=2)
    d1 = program.dualize(p)
    d2 = program.dual_via_basis(p, np.eye(3))
    r1 = solver.solve(d1)
    r2 = solver.solve(d2)
    assert r1.status == "Optimal" and r2.status == "Optimal"
    assert np.isclose(r1.pobj, r2.pobj, atol=1e-6)


def test_necessary_feasibility_screens_fire_on_bad_rhs():
    # A maps into the first coordinate only, K is the zero cone, and b has a
    # component outside A(span C): screens must report the contradiction
    dom, cod = space(real(2)), space(real(2))
    amat = np.array([[1.0, 1.0], [0.0, 0.0]])
    p = program.ConicProgram(
        A=LinearMap(dom, cod, amat), b=np.array([0.0, 1.0]), c=np.zeros(2),
        K=cones.cone(cod, cones.ZERO), C=cones.cone(dom, cones.FREE),
        sense="sup")
    hits = program.necessary_feasibility_screens(p)
    assert any(h["screen"] == 2 for h in hits)


def test_necessary_feasibility_screens_quiet_on_planted():
    for seed in range(5):
        p = gallery.planted_strong_duality(
            [(cones.NONNEG, 3)], [(cones.ZERO, 2)], seed=seed)
        assert program.necessary_feasibility_screens(p) == []


def test_program_validation():
    dom, cod = space(real(2)), space(real(3))
    a = LinearMap(dom, cod, np.zeros((3, 2)))
    with pytest.raises(ValueError):
        program.ConicProgram(A=a, b=np.zeros(2), c=np.zeros(2),
                             K=cones.cone(cod, cones.NONNEG),
                             C=cones.cone(dom, cones.NONNEG), sense="sup")
    with pytest.raises(ValueError):
        program.ConicProgram(A=a, b=np.zeros(3), c=np.zeros(2),
                             K=cones.cone(cod, cones.NONNEG),
                             C=cones.cone(dom, cones.NONNEG), sense="max")
