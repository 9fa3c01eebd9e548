import math

import numpy as np
import pytest

from ptannulus import PotentialSpec
from ptannulus import field as fld
from ptannulus.radial import Geometry
from ptannulus.threshold import find_threshold

M = 40


@pytest.fixture(scope="module")
def beta_c():
    return find_threshold(PotentialSpec(), "v:1", M, trace_levels=False).beta_c


def modes_at(beta):
    return fld.angular_modes(PotentialSpec.single(1, beta), M)


def test_weak_coupling_ground_state(beta_c):
    g = modes_at(0.05 * beta_c)[0]
    c0 = abs(g.coefficients[M]) ** 2
    assert c0 > 0.999
    assert abs(c0 - (1 - (0.05 * beta_c) ** 2 / 2)) < 1e-5
    assert fld.isotropy_ratio(g) < 1.01


@pytest.mark.parametrize("rel", [0.05, 0.75, 1.05])
def test_parseval(beta_c, rel):
    for mode in modes_at(rel * beta_c)[:6]:
        assert abs(fld.parseval(mode) - 1) < 1e-8


@pytest.mark.parametrize("rel", [0.05, 0.75])
def test_pi_rotation_symmetric_phase(beta_c, rel):
    for mode in modes_at(rel * beta_c)[:6]:
        assert abs(mode.alpha_sq.imag) < 1e-9
        assert fld.pi_rotation_asymmetry(mode) < 1e-8


def test_broken_phase_gain_dominates(beta_c):
    modes = modes_at(1.05 * beta_c)
    up = max(modes[:4], key=lambda m: m.alpha_sq.imag)
    down = min(modes[:4], key=lambda m: m.alpha_sq.imag)
    assert up.alpha_sq.imag > 0 > down.alpha_sq.imag
    wg, wl = fld.gain_loss_weights(up, 1)
    assert abs(wg + wl - 1) < 1e-8
    assert wg > wl
    wg2, wl2 = fld.gain_loss_weights(down, 1)
    assert wl2 > wg2
    # a growing mode is not invariant under the pi rotation that swaps gain and loss
    assert fld.pi_rotation_asymmetry(up) > 1e-3


def test_weights_sum_for_symmetric_mode(beta_c):
    for mode in modes_at(0.75 * beta_c)[:5]:
        wg, wl = fld.gain_loss_weights(mode, 1)
        assert abs(wg + wl - 1) < 1e-8
        assert abs(wg - wl) < 1e-8


def test_profile_matches_coefficients():
    c = np.zeros(5, complex)
    c[2], c[3] = 1, 1j  # m = 0 and m = 1
    mode = fld.AngularMode(c, 1.0)
    phi = np.array([0.0, np.pi / 2])
    assert fld.angular_profile(mode, phi) == pytest.approx(np.array([1 + 1j, 1 - 1]) / math.sqrt(2))


def test_angular_mode_validation():
    with pytest.raises(ValueError):
        fld.AngularMode(np.ones(4), 1.0)
    with pytest.raises(ValueError):
        fld.AngularMode(np.zeros(3), 1.0)


@pytest.mark.parametrize("geom", [Geometry(), Geometry(0.4, 1.0)])
def test_density_normalised_with_zero_walls(beta_c, geom):
    mode = modes_at(0.5 * beta_c)[1]
    d = fld.density(mode, geom, q=2, n_rho=200, n_phi=256)
    assert abs(d.integral() - 1) < 1e-4
    assert np.max(np.abs(d.values[-1])) < 1e-10
    if not geom.is_disc:
        assert np.max(np.abs(d.values[0])) < 1e-10
    assert d.rho_grid[0] == geom.a_ratio and d.rho_grid[-1] == 1.0
    assert np.all(d.values >= 0)


def test_density_order_from_eigenvalue(beta_c):
    mode = modes_at(0.3 * beta_c)[3]
    d = fld.density(mode, Geometry())
    assert d.meta["alpha"] == pytest.approx(math.sqrt(mode.alpha_sq.real))


def test_density_rejects_broken_mode(beta_c):
    up = max(modes_at(1.05 * beta_c)[:4], key=lambda m: m.alpha_sq.imag)
    with pytest.raises(ValueError):
        fld.density(up, Geometry())


def test_density_write(tmp_path, beta_c):
    d = fld.density(modes_at(0.1)[0], Geometry(), n_rho=4, n_phi=3)
    d.write(tmp_path / "dens")
    lines = (tmp_path / "dens.csv").read_text().splitlines()
    assert lines[0] == "rho,phi,density" and len(lines) == 13
