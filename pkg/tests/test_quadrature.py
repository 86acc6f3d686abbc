import math

import numpy as np
import pytest

from levytax.errors import AccuracyError
from levytax.quadrature import QuadratureConfig, adaptive_gk, gk_batch, gk_cell

CFG = QuadratureConfig()


def test_gk_cell_polynomial_exact():
    # 15-point Kronrod integrates low-degree polynomials to round-off
    val, err = gk_cell(lambda t: t**4, 0.0, 1.0)
    assert val == pytest.approx(0.2, abs=1e-15)
    assert err < 1e-14


def test_gk_cell_error_estimate_is_conservative():
    f = lambda t: np.exp(-(t**2))
    val, err = gk_cell(f, -1.0, 1.0)
    truth = math.sqrt(math.pi) * math.erf(1.0)
    assert abs(val - truth) <= max(err, 1e-15)


def test_adaptive_known_integrals():
    val, err, cells = adaptive_gk(lambda t: np.sin(t), 0.0, math.pi, CFG)
    assert val == pytest.approx(2.0, rel=1e-12)
    assert err <= max(CFG.abs_tol, CFG.rel_tol * abs(val))
    # cells partition the interval
    assert cells[0][0] == 0.0
    assert cells[-1][1] == math.pi
    for (a, b, _), (c, d, _) in zip(cells, cells[1:]):
        assert b == c

    val, _, _ = adaptive_gk(lambda t: 1.0 / (1.0 + t**2), 0.0, 1.0, CFG)
    assert val == pytest.approx(math.pi / 4, rel=1e-12)


def test_adaptive_oscillatory():
    val, _, _ = adaptive_gk(lambda t: np.cos(40.0 * t), 0.0, 1.0, CFG)
    assert val == pytest.approx(math.sin(40.0) / 40.0, rel=1e-10)


def test_adaptive_integrable_singularity():
    # 1/sqrt(t) on (0, 1]: adaptive grading from the left edge
    val, _, _ = adaptive_gk(
        lambda t: 1.0 / np.sqrt(np.maximum(t, 1e-300)), 0.0, 1.0, CFG,
        rel_tol=1e-8, abs_tol=1e-10,
    )
    assert val == pytest.approx(2.0, rel=1e-6)


def test_adaptive_initial_knots_catch_kink():
    # |t - 1/3| has a kink the seed knot resolves on the first pass
    f = lambda t: np.abs(t - 1.0 / 3.0)
    truth = (1.0 / 3.0) ** 2 / 2 + (2.0 / 3.0) ** 2 / 2
    val, _, cells = adaptive_gk(f, 0.0, 1.0, CFG, initial_knots=[1.0 / 3.0])
    assert val == pytest.approx(truth, abs=1e-14)
    assert any(abs(a - 1.0 / 3.0) < 1e-15 for a, _, _ in cells)


def test_cells_cumulative_consistency():
    f = lambda t: np.exp(t)
    val, _, cells = adaptive_gk(f, 0.0, 2.0, CFG)
    assert sum(c for _, _, c in cells) == pytest.approx(val, rel=1e-14)
    # partial sums track exp(b) - 1
    run = 0.0
    for _, b, c in cells:
        run += c
        assert run == pytest.approx(math.exp(b) - 1.0, rel=1e-9)


def test_gk_batch_matches_cellwise():
    f = lambda t: np.exp(-t) * np.sin(t)
    lo = np.array([0.0, 0.5, 1.0, 2.0])
    hi = np.array([0.5, 1.0, 2.0, 3.0])
    batch = gk_batch(f, lo, hi)
    single = [gk_cell(f, a, b)[0] for a, b in zip(lo, hi)]
    assert np.allclose(batch, single, rtol=1e-15)
    total, _, _ = adaptive_gk(f, 0.0, 3.0, CFG)
    assert batch.sum() == pytest.approx(total, rel=1e-9)


def test_empty_interval():
    val, err, cells = adaptive_gk(lambda t: t, 1.0, 1.0, CFG)
    assert val == 0.0 and err == 0.0
    assert cells == [(1.0, 1.0, 0.0)]


def test_accuracy_error_raised():
    cfg = QuadratureConfig(max_subdivisions=4)
    with pytest.raises(AccuracyError) as exc:
        adaptive_gk(lambda t: np.cos(500.0 * t) * 500.0, 0.0, 1.0, cfg)
    assert exc.value.achieved is not None
    assert exc.value.achieved > 0


def test_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureConfig(abs_tol=-1.0)
    with pytest.raises(ValueError):
        QuadratureConfig(max_subdivisions=0)
    with pytest.raises(ValueError):
        QuadratureConfig(singular_edge_fraction=0.7)
