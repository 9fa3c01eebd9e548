import json
import math

import numpy as np
import pytest

from ptannulus import PotentialSpec, SpecError
from ptannulus import phasemap as pmod
from ptannulus.eigen import EigenConvergenceError
from ptannulus.phasemap import Axis, scan, symmetry_check, threshold_curve


def small_map(workers=1, count=11, M=12):
    return scan(PotentialSpec(), Axis("v:1", -1.5, 1.5, count), Axis("v:3", -4.0, 4.0, count),
                cutoff_M=M, workers=workers)


def test_axis_validation():
    with pytest.raises(ValueError):
        Axis("v:1", 1.0, 1.0)
    with pytest.raises(ValueError):
        Axis("v:1", 2.0, -2.0)
    with pytest.raises(ValueError):
        Axis("v:1", 0, 1, count=1)
    with pytest.raises(ValueError):
        Axis("u:2", -1, 1, normalized=True)
    with pytest.raises(SpecError):
        Axis("w:1", -1, 1)


def test_centered_axis_is_exactly_antisymmetric():
    x = Axis("v:1", -0.95, 0.95, 101).coords()
    assert np.array_equal(x, -x[::-1]) and x[50] == 0.0


def test_cell_matches_direct_solve():
    pm = small_map()
    from ptannulus import build, eigvals
    for i, j in [(0, 0), (3, 7), (10, 5)]:
        spec = PotentialSpec().with_strengths({"v:1": pm.coords1[i], "v:3": pm.coords2[j]})
        ref = float(np.max(np.abs(eigvals(build(spec, 12)).eigenvalues.imag)))
        assert abs(pm.values[i, j] - ref) <= 1e-9 * max(1, ref)


def test_origin_is_symmetric_and_corners_broken():
    pm = small_map()
    assert pm.values[5, 5] <= pm.epsilon
    assert pm.values[0, 0] > pm.epsilon and pm.values[-1, -1] > pm.epsilon


def test_deterministic_across_workers():
    a, b = small_map(1), small_map(3)
    assert np.array_equal(a.values, b.values)


def test_point_reflection_on_small_map():
    pm = small_map()
    assert symmetry_check(pm, "point_reflection").passed
    # a single odd gain-loss sign flip is not a symmetry of a two-v map
    assert not symmetry_check(pm, "axis1_sign_flip").passed


def test_single_flip_with_even_hermitian_axis():
    pm = scan(PotentialSpec(), Axis("u:4", -2.0, 2.0, 9), Axis("v:3", -4.0, 4.0, 9), cutoff_M=12)
    assert symmetry_check(pm, "axis2_sign_flip").passed


def test_symmetry_needs_centered_grid():
    pm = scan(PotentialSpec(), Axis("u:2", 0.0, 1.0, 5), Axis("v:3", -1.0, 1.0, 5), cutoff_M=8)
    with pytest.raises(ValueError):
        symmetry_check(pm, "point_reflection")
    assert symmetry_check(pm, "axis2_sign_flip").passed
    with pytest.raises(ValueError):
        symmetry_check(pm, "rotation")


def test_normalized_axes_use_single_term_thresholds():
    pm = scan(PotentialSpec(), Axis("v:1", -1, 1, 3, True), Axis("v:3", -1, 1, 3, True),
              cutoff_M=10, normalization={"v:1": 0.7344, "v:3": 2.9356})
    assert pm.strengths(1)[-1] == pytest.approx(0.7344)
    assert pm.spec_at(1.0, -1.0).strengths() == {"v:1": 0.7344, "v:3": -2.9356}


def test_threshold_curve_along_axis():
    pm = scan(PotentialSpec(), Axis("v:3", -1.0, 1.0, 3), Axis("v:1", -1.5, 1.5, 31), cutoff_M=20)
    curve = threshold_curve(pm, axis=1)
    mid = curve[1]
    assert mid.fixed == 0.0
    assert abs(mid.upper - 0.7344) <= 0.05 + 1e-12 and abs(mid.lower + 0.7344) <= 0.05 + 1e-12
    fine = threshold_curve(pm, axis=1, refine=True, resolution=1e-5)[1]
    assert abs(fine.upper - 0.73442) < 1e-4


def test_window_at_matches_grid():
    pm = scan(PotentialSpec(), Axis("v:1", -1.0, 1.0, 3), Axis("v:3", -4.0, 4.0, 81), cutoff_M=20)
    w = pmod.window_at(pm, 0.0, axis=1, resolution=1e-5)
    assert abs(w - 2.9356) < 1e-3
    assert pmod.window_at(pm, 1.0, axis=1) == 0.0  # v:1 = 1 is already broken


def test_lambda_symmetric_rule():
    assert pmod.lambda_symmetric(1, 2) is False
    assert pmod.lambda_symmetric(3, 4) is True
    assert pmod.lambda_symmetric(3, 6) is False
    assert pmod.lambda_symmetric(5, 6) is True
    with pytest.raises(SpecError):
        pmod.lambda_symmetric(1, 3)


def test_failed_cells_are_nan(monkeypatch):
    real = pmod._cell

    def flaky(spec, M):
        if spec.strength("v:1") > 0.9:
            raise EigenConvergenceError("forced")
        return real(spec, M)

    monkeypatch.setattr(pmod, "_cell", flaky)
    pm = scan(PotentialSpec(), Axis("v:1", -1.0, 1.0, 5), Axis("v:3", -1.0, 1.0, 5), cutoff_M=8)
    assert np.isnan(pm.values[-1]).all() and np.isfinite(pm.values[:-1]).all()
    assert len(pm.failures) == 5


def test_write_outputs(tmp_path):
    pm = scan(PotentialSpec(), Axis("v:1", -1.0, 1.0, 3), Axis("u:2", -1.0, 1.0, 4), cutoff_M=8)
    pm.write(tmp_path / "pm")
    lines = (tmp_path / "pm.csv").read_text().splitlines()
    assert lines[0] == "s1,s2,max_imag" and len(lines) == 13
    head = json.loads((tmp_path / "pm.json").read_text())
    assert head["cutoff_M"] == 8 and head["axis2"]["term"] == "u:2"
    mat = (tmp_path / "pm.matrix").read_text().splitlines()
    assert mat[0].split()[0] == "3" and len(mat) == 5


def test_same_term_on_both_axes():
    with pytest.raises(ValueError):
        scan(PotentialSpec(), Axis("v:1", -1, 1, 3), Axis("v:1", -1, 1, 3), cutoff_M=8)


def test_cutoff_too_small():
    with pytest.raises(SpecError):
        scan(PotentialSpec(), Axis("v:1", -1, 1, 3), Axis("v:9", -1, 1, 3), cutoff_M=4)
