import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import mink, tetrad_closed_form
from staticmd.errors import DegeneracyError, MeshError, NormalizationError
from staticmd.grids import PhysicalConstants, SpinorPoint, StaticFieldGrid, gauss_theta
from staticmd.spinor import (Dyad, current, dyad_from_angles, grid_tetrad_potential,
                             lower_index, minkowski, null_tetrad, orientation_sign,
                             potential_static, raise_index, reality_residuals,
                             tetrad_potential_components, v_field)

taus = st.floats(0.0, math.pi)
etas = st.floats(-10.0, 10.0)


def test_dyad_examples():
    d = dyad_from_angles(0.0, 0.0)
    assert np.allclose(d.o, [0, -1], atol=1e-15)
    d = dyad_from_angles(math.pi / 2, 0.0)
    assert np.allclose(d.o, [math.sqrt(2) / 2, -math.sqrt(2) / 2], atol=1e-15)


@settings(max_examples=1000, deadline=None)
@given(taus, etas)
def test_dyad_normalization(tau, eta):
    d = dyad_from_angles(tau, eta)
    assert abs(d.contraction() - 1) < 1e-14
    assert np.all(np.abs(d.o) <= 1 + 1e-15) and np.all(np.abs(d.iota) <= 1 + 1e-15)


@settings(max_examples=1000, deadline=None)
@given(taus, etas)
def test_tetrad_identities(tau, eta):
    t = null_tetrad(dyad_from_angles(tau, eta))
    for a, b, want in [(t.l, t.l, 0), (t.n, t.n, 0), (t.m, t.m, 0), (t.l, t.n, 1),
                       (t.m, t.mbar, -1), (t.l, t.m, 0), (t.n, t.m, 0)]:
        assert abs(minkowski(a, b) - want) < 1e-12
    assert abs(t.m[0]) < 1e-14


def test_tetrad_matches_closed_form():
    rng = np.random.default_rng(1)
    tau = rng.uniform(0, np.pi, 500)
    eta = rng.uniform(-np.pi, np.pi, 500)
    t = null_tetrad(dyad_from_angles(tau, eta))
    l, n, m = tetrad_closed_form(tau, eta)
    assert np.allclose(t.l, l, atol=1e-14)
    assert np.allclose(t.n, n, atol=1e-14)
    assert np.allclose(t.m, m, atol=1e-14)
    assert np.allclose(mink(l, n), 1, atol=1e-14)


def test_index_raise_lower_roundtrip():
    xi = np.array([0.3 + 0.1j, -1.2 + 0.5j])
    assert np.allclose(lower_index(raise_index(xi)), xi)
    assert np.allclose(raise_index(xi), [xi[1], -xi[0]])


def test_unnormalized_dyad_rejected():
    d = dyad_from_angles(0.4, 0.2)
    with pytest.raises(NormalizationError):
        null_tetrad(Dyad(2 * d.o, d.iota))


def test_current_examples():
    j = current(SpinorPoint(1.0, 0.7, 0.0, 1.3))
    assert np.allclose(j, [math.sqrt(2), 0, 0, 0], atol=1e-15)
    assert abs(minkowski(j, j) - 2) < 1e-14
    j2 = current(SpinorPoint(2.0, 0.7, 0.0, 1.3))
    assert np.allclose(j2, 2 * j)
    with pytest.raises(DegeneracyError):
        current(SpinorPoint(0.0, 0.1, 0.0, 0.0))


@settings(max_examples=1000, deadline=None)
@given(st.floats(-6, 6), taus, etas)
def test_current_norm(logR, tau, eta):
    R = 10.0**logR
    j = current(SpinorPoint(R, tau, 0.0, eta))
    assert abs(minkowski(j, j) / (2 * R * R) - 1) < 1e-12


def test_v_field_examples():
    assert np.allclose(v_field(SpinorPoint(1.0, 0.0, 0.0, 0.0)), [0, 0, 1])
    assert np.allclose(v_field(SpinorPoint(2.0, math.pi / 2, 0.0, math.pi / 2)), [0, 2, 0],
                       atol=1e-15)
    rng = np.random.default_rng(2)
    R = rng.uniform(0.1, 5, 100)
    v = v_field(SpinorPoint(R, rng.uniform(0, np.pi, 100), 0.0, rng.uniform(0, 6, 100)))
    assert np.allclose(np.linalg.norm(v, axis=-1), R)


def test_spatial_part_of_l_is_v_direction():
    # l - n = sqrt(2) (0, V_hat)
    rng = np.random.default_rng(3)
    tau, eta = rng.uniform(0, np.pi, 50), rng.uniform(0, 6, 50)
    t = null_tetrad(dyad_from_angles(tau, eta))
    v = v_field(SpinorPoint(np.ones(50), tau, 0.0, eta))
    assert np.allclose((t.l - t.n)[:, 1:] / math.sqrt(2), v, atol=1e-14)


def _monopole_grid(nr=30, nt=24, chi=None, R=None, constants=None):
    r = np.geomspace(1.0, 10.0, nr)
    th = gauss_theta(nt)[0]
    return StaticFieldGrid.from_functions(
        r, th, R or (lambda r, t: 1 / r**2), lambda r, t: t,
        chi or (lambda r, t: np.pi + 0 * r), constants=constants)


def test_potential_constant_chi():
    g = _monopole_grid(constants=PhysicalConstants(2.0, 0.5))
    A0, _ = potential_static(g)
    assert np.allclose(A0, -4.0)


def test_potential_monopole():
    g = _monopole_grid(chi=lambda r, t: np.pi - 1 / r, constants=PhysicalConstants(1.0, 2.0))
    _, (ar, at, ap) = potential_static(g)
    rr, th = g.mesh()
    assert np.allclose(ap, np.cos(th) / (np.sin(th) * 2 * 2.0 * rr), rtol=1e-12)
    assert np.allclose(ar, 0, atol=1e-12) and np.allclose(at, 0, atol=1e-12)


def test_potential_needs_positive_R_and_mesh():
    r = np.array([1.0, 2.0])
    with pytest.raises(MeshError):
        potential_static(StaticFieldGrid.from_functions(r, gauss_theta(8)[0], 1.0, 0.5, 0.0))


def test_reality_exact_monopole_vacuum():
    rep = reality_residuals(_monopole_grid(), interior=1)
    # d_r(r^2 * r^-2) is exact for the stencil
    assert rep.div_l2 < 1e-12 and rep.cross_l2 < 1e-12


def test_reality_linear_in_perturbation(unit_solution):
    from staticmd.spherical import sample_solution
    r = np.geomspace(2.0, 20.0, 41)
    th = gauss_theta(16)[0]
    R, chi, _ = sample_solution(unit_solution, r)
    rr, tt = np.meshgrid(r, th, indexing="ij")
    cross = []
    for d in (1e-4, 2e-4, 4e-4):
        g = StaticFieldGrid(r, th, R[:, None] * np.ones_like(tt), tt,
                            chi[:, None] + d * np.sin(tt) * np.cos(rr), 0.0)
        cross.append(reality_residuals(g, interior=1).cross_l2)
    assert cross[1] / cross[0] == pytest.approx(2, rel=1e-6)
    assert cross[2] / cross[1] == pytest.approx(2, rel=1e-6)


def _solution_grid(sol, n):
    from staticmd.spherical import sample_solution
    r = np.linspace(2.0, 6.0, n)
    th = np.linspace(0.3, np.pi - 0.3, 9)
    R, chi, _ = sample_solution(sol, r)
    tt = np.broadcast_to(th, (n, th.size))
    return StaticFieldGrid(r, th, R[:, None] * np.ones_like(tt), tt,
                           chi[:, None] * np.ones_like(tt), 0.0)


def test_reality_residual_second_order(unit_solution):
    ns = [21, 41, 81, 161]
    res = [reality_residuals(_solution_grid(unit_solution, n)).div_l2 for n in ns]
    h = [4.0 / (n - 1) for n in ns]
    slope = np.polyfit(np.log(h), np.log(res), 1)[0]
    assert 1.8 <= slope <= 2.2


def test_orientation_sign(unit_solution):
    g = _solution_grid(unit_solution, 21)
    assert orientation_sign(g) == (1, True)
    mirror = StaticFieldGrid(g.r, g.theta, g.R, np.pi - g.tau, g.chi, np.pi)
    assert orientation_sign(mirror) == (-1, True)


def test_tetrad_potential_components():
    rng = np.random.default_rng(4)
    tau, eta = rng.uniform(0, np.pi, 200), rng.uniform(0, 6, 200)
    t = null_tetrad(dyad_from_angles(tau, eta))
    A = rng.normal(size=(200, 4))
    al, an, am, amb = tetrad_potential_components(A, t)
    assert np.allclose(amb, np.conj(am))
    assert np.allclose(al.imag, 0) and np.allclose(an.imag, 0)
    # static scalar potential has no m projection since m_0 = 0
    A_static = np.zeros((200, 4))
    A_static[:, 0] = rng.normal(size=200)
    _, _, am0, _ = tetrad_potential_components(A_static, t)
    assert np.allclose(am0, 0, atol=1e-14)
    # oracle: explicit contraction with the closed-form tetrad
    l, n, m = tetrad_closed_form(tau, eta)
    assert np.allclose(al, mink(l, A)) and np.allclose(am, mink(m, A))


def test_grid_tetrad_potential_monopole():
    g = _monopole_grid(chi=lambda r, t: np.pi - 1 / r)
    al, an, am, _ = grid_tetrad_potential(g)
    A0, _ = potential_static(g)
    # A_l + A_n = sqrt(2) A0 because l + n = sqrt(2) (1, 0)
    assert np.allclose(al + an, math.sqrt(2) * A0)
