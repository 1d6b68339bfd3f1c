"""Exact polyhedral projection: double description, projection cone, FM oracle."""

from fractions import Fraction

import numpy as np
import pytest

from conedual import cones, program, projection
from conedual.spaces import LinearMap, Subspace, real, space


def _fr(rows):
    return [[Fraction(x) for x in row] for row in rows]


def _packing(amat, b=None):
    amat = np.asarray(amat, dtype=float)
    m, n = amat.shape
    dom, cod = space(real(n)), space(real(m))
    if b is None:
        b = np.ones(m)
    return program.ConicProgram(
        A=LinearMap(dom, cod, amat), b=np.asarray(b, dtype=float),
        c=np.ones(n), K=cones.cone(cod, cones.NONNEG),
        C=cones.cone(dom, cones.NONNEG), sense="sup")


def test_double_description_orthant():
    # {x : x_i >= 0} has the standard basis as extreme rays
    lin, rays = projection.double_description(_fr([[1, 0, 0], [0, 1, 0],
                                                   [0, 0, 1]]), 3)
    assert lin == []
    got = {tuple(r) for r in rays}
    assert got == {(1, 0, 0), (0, 1, 0), (0, 0, 1)}


def test_double_description_halfspace_lineality():
    # one inequality in R^2: lineality along its boundary plus one ray
    lin, rays = projection.double_description(_fr([[1, 0]]), 2)
    assert len(lin) == 1 and len(rays) == 1
    assert lin[0][0] == 0 and lin[0][1] != 0
    assert rays[0][0] > 0


def test_double_description_pointed_3d():
    # x3 >= 0, x3 >= x1, x3 >= -x1, x2 free -> lineality e2, rays (+-1, 0, 1)
    ineqs = _fr([[-1, 0, 1], [1, 0, 1], [0, 0, 1]])
    lin, rays = projection.double_description(ineqs, 3)
    assert len(lin) == 1
    assert lin[0][0] == 0 and lin[0][2] == 0 and lin[0][1] != 0
    norm_rays = set()
    for r in rays:
        assert r[2] > 0
        norm_rays.add((Fraction(r[0], r[2]), Fraction(r[1], r[2])))
    assert norm_rays == {(Fraction(1), Fraction(0)), (Fraction(-1), Fraction(0))}


def test_double_description_rays_satisfy_inequalities():
    rng = np.random.default_rng([13, 1])
    for _ in range(10):
        m, n = int(rng.integers(2, 6)), int(rng.integers(2, 5))
        ineqs = _fr(rng.integers(-3, 4, size=(m, n)).tolist())
        lin, rays = projection.double_description(ineqs, n)
        for r in rays:
            assert all(projection._dot(a, r) >= 0 for a in ineqs)
            assert any(r)
        for l in lin:
            assert all(projection._dot(a, l) == 0 for a in ineqs)


def test_projection_cone_and_extreme_rays():
    p = _packing([[1, 1, 2], [2, 1, 1]])
    sub = Subspace(p.A.domain, np.eye(3)[:, :2])
    pc = projection.projection_cone(p, sub)
    lin, rays = projection.extreme_rays(pc)
    assert len(rays) > 0
    m = p.A.codomain.dim
    for r in list(rays) + list(lin):
        y, w = r[:m], r[m:]
        assert cones.member(cones.dual(p.K), y, 1e-9)
        assert cones.member(cones.dual(p.C), w, 1e-9)
        # A* y - w must lie in the subspace: last coordinate vanishes
        assert abs((p.A.matrix.T @ y - w)[2]) <= 1e-9


def test_precondition_failure_raises():
    # eliminating x2 requires w2 = (A* y)_2 > 0, but the second column of A
    # is negative and y >= 0, so the projection cone has no interior point
    dom, cod = space(real(2)), space(real(1))
    p = program.ConicProgram(
        A=LinearMap(dom, cod, -np.ones((1, 2))), b=np.ones(1), c=np.ones(2),
        K=cones.cone(cod, cones.NONNEG), C=cones.cone(dom, cones.NONNEG),
        sense="sup")
    sub = Subspace(p.A.domain, np.eye(2)[:, :1])
    with pytest.raises(projection.PreconditionFailed):
        projection.project(p, sub)


def test_project_matches_fm_on_simplex():
    # x >= 0, x1 + x2 + x3 <= 1 projected onto (x1, x2)
    p = _packing([[1, 1, 1]])
    sub = Subspace(p.A.domain, np.eye(3)[:, :2])
    h = projection.project(p, sub)
    assert h.exact
    normals = [[1.0, 1.0, 1.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0],
               [0.0, 0.0, -1.0]]
    offsets = [1.0, 0.0, 0.0, 0.0]
    fm = projection.fourier_motzkin(normals, offsets, [2])
    assert h.canonical_set() == fm.canonical_set()
    # the projection of the simplex onto two coordinates is the triangle
    assert h.contains(np.array([0.3, 0.3, 0.0]))
    assert not h.contains(np.array([0.8, 0.8, 0.0]))


def test_project_matches_fm_random_integer_instances():
    rng = np.random.default_rng([13, 2])
    done = 0
    while done < 8:
        m, n = int(rng.integers(1, 4)), int(rng.integers(2, 5))
        amat = rng.integers(1, 5, size=(m, n)).astype(float)
        p = _packing(amat, b=rng.integers(1, 4, size=m).astype(float))
        k = int(rng.integers(1, n))
        sub = Subspace(p.A.domain, np.eye(n)[:, :k])
        h = projection.project(p, sub)
        normals = np.vstack([amat, -np.eye(n)])
        offsets = np.concatenate([p.b, np.zeros(n)])
        fm = projection.fourier_motzkin(normals, offsets, list(range(k, n)))
        assert h.canonical_set() == fm.canonical_set(), (amat, p.b, k)
        done += 1


def test_project_sampled_outer_approximation():
    # SOC variable cone takes the sampled path; result is outer and marked
    # inexact
    dom, cod = space(real(3)), space(real(1))
    amat = np.array([[0.0, 0.0, 1.0]])
    p = program.ConicProgram(
        A=LinearMap(dom, cod, amat), b=np.ones(1), c=np.zeros(3),
        K=cones.cone(cod, cones.NONNEG), C=cones.cone(dom, cones.SOC),
        sense="sup")
    sub = Subspace(p.A.domain, np.eye(3)[:, :2])
    h = projection.project(p, sub, samples=48, seed=0)
    assert not h.exact
    # feasible points project inside the reported outer set
    for x in (np.zeros(3), np.array([0.5, 0.0, 0.0]), np.array([0.0, -0.9, 0.0])):
        # lift: any feasible point of the program with those first two coords
        full = np.array([x[0], x[1], np.hypot(x[0], x[1])])
        assert h.contains(np.array([full[0], full[1], 0.0]), tol=1e-5)


def test_fourier_motzkin_cube_to_square():
    normals = np.vstack([np.eye(3), -np.eye(3)])
    offsets = np.ones(6)
    fm = projection.fourier_motzkin(normals, offsets, [2])
    assert len(fm.frac_rows) == 4
    assert fm.contains(np.array([0.9, -0.9, 0.0]))
    assert not fm.contains(np.array([1.1, 0.0, 0.0]))


def test_fourier_motzkin_detects_empty():
    normals = [[1.0], [-1.0]]
    offsets = [-2.0, 1.0]  # x <= -2 and x >= -1
    fm = projection.fourier_motzkin(normals, offsets, [0])
    # the infeasible marker row 0 <= negative survives
    assert any(all(c == 0 for c in r[:-1]) and r[-1] < 0 for r in fm.frac_rows)


def test_fourier_motzkin_variable_cap():
    with pytest.raises(ValueError):
        projection.fourier_motzkin(np.zeros((1, 9)), np.zeros(1), [0])
