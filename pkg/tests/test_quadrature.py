import numpy as np
import pytest
from scipy.integrate import quad

from curvedlink.curves import canonical_curve
from curvedlink.errors import InvalidInput, NumericalFailure, TagMismatch
from curvedlink.quadrature import (PairGrid, PolarGrid, S3Grid, check_tag, convergence_sweep, default_grid,
                                   estimated_order, integrate_curve, integrate_pair, integrate_volume)

PI = np.pi


def test_s3_grid_volume_and_symmetry():
    G = S3Grid.build(8, 16, 16)
    assert G.volume() == pytest.approx(2 * PI**2, rel=1e-14)
    np.testing.assert_allclose(np.sum(G.nodes**2, axis=1), 1.0, atol=1e-15)
    assert integrate_volume(G, lambda X: X[:, 0]) == pytest.approx(0.0, abs=1e-13)
    # int x0^2 = vol / 4
    assert integrate_volume(G, lambda X: X[:, 0] ** 2) == pytest.approx(PI**2 / 2, rel=1e-13)
    with pytest.raises(InvalidInput):
        S3Grid.build(8, 16, 15)


def test_recentered_s3_grid_keeps_weights():
    G = S3Grid.build(6, 12, 12)
    y = np.array([0.5, 0.5, 0.5, 0.5])
    R = G.recenter(y)
    np.testing.assert_allclose(R.nodes[0] @ y, G.nodes[0] @ np.array([1.0, 0, 0, 0]), atol=1e-12)
    assert integrate_volume(R, lambda X: (X @ y) ** 2) == pytest.approx(PI**2 / 2, rel=1e-12)


@pytest.mark.parametrize("tag", ["r3", "s3", "h3"])
def test_polar_grid_volume(tag):
    G = PolarGrid.build(tag, None, 1.2, 12, 8, 16)
    assert G.volume() == pytest.approx(G.exact_volume(), rel=1e-12)


def test_polar_grid_errors():
    with pytest.raises(InvalidInput):
        PolarGrid.build("r3", None, 0.0)
    with pytest.raises(InvalidInput):
        PolarGrid.build("s3", None, 4.0)


def test_default_grid_kinds():
    assert isinstance(default_grid("s3", scale=0.25), S3Grid)
    assert isinstance(default_grid("h3", scale=0.25), PolarGrid)
    with pytest.raises(TagMismatch):
        check_tag(default_grid("r3", scale=0.25), "s3")


def test_integrate_curve():
    c = canonical_curve("great_circle", n=64)
    assert integrate_curve(c, np.ones(c.n)) == pytest.approx(2 * PI, abs=1e-12)
    s = 2 * PI * np.arange(c.n) / c.n
    assert integrate_curve(c, np.cos(s)) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(NumericalFailure):
        integrate_curve(c, np.full(c.n, np.nan))


def test_integrate_curve_self_convergence():
    vals = []
    for n in (64, 128):
        s = 2 * PI * np.arange(n) / n
        c = canonical_curve("great_circle", n=n)
        vals.append(integrate_curve(c, np.exp(np.cos(s))))
    assert abs(vals[1] - vals[0]) < 1e-10


def _ball_pair_inverse_square(r):
    # distance density of two uniform points in the unit ball is 3 s^2 (1 - 3s/4 + s^3/16) / vol^2
    vol = 4 * PI / 3
    return vol**2 * quad(lambda s: 3 * (1 - 3 * s / 4 + s**3 / 16), r, 2)[0]


def test_pair_mask_bias_scales_with_r_cut():
    G = PolarGrid.build("r3", None, 1.0, 12, 8, 16)
    full = _ball_pair_inverse_square(0.0)
    bias = {}
    with np.errstate(divide="ignore"):
        for r in (0.4, 0.2):
            v = integrate_pair(PairGrid(G, r), lambda X, Y: 1 / np.sum((X - Y) ** 2, axis=-1))
            assert v == pytest.approx(_ball_pair_inverse_square(r), rel=1e-2)
            bias[r] = full - v
    exact_ratio = (full - _ball_pair_inverse_square(0.4)) / (full - _ball_pair_inverse_square(0.2))
    assert bias[0.4] / bias[0.2] == pytest.approx(exact_ratio, rel=3e-2)
    assert 1.7 < bias[0.4] / bias[0.2] < 2.0


def test_pair_grid_default_cut_below_spacing():
    G = PolarGrid.build("r3", None, 1.0, 6, 4, 8)
    P = PairGrid.build(G)
    assert 0 < P.r_cut < G.spacing()


def test_convergence_sweep():
    rows = convergence_sweep(lambda n: 1.0 + 1.0 / n**2, [8, 16, 32, 64])
    assert np.isnan(rows[0].delta)
    assert estimated_order(rows) == pytest.approx(2.0, abs=1e-9)
    flat = convergence_sweep(lambda n: 3.0, [4, 8])
    assert flat[1].delta == 0.0
    with pytest.raises(InvalidInput):
        convergence_sweep(lambda n: 0.0, [4])
