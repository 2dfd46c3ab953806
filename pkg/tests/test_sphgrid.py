import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypflow import sphgrid
from hypflow.errors import DomainError
from hypflow.sphgrid import Grid


def test_modes_and_aliases():
    assert sphgrid.canonical_mode("Axisym") == sphgrid.AXISYMMETRIC
    assert sphgrid.canonical_mode("2d") == sphgrid.LATLON
    with pytest.raises(DomainError):
        sphgrid.canonical_mode("cubed")


def test_grid_layouts():
    g = Grid.axisymmetric(65)
    assert g.shape == (65,)
    assert g.theta[0] == 0.0 and g.theta[-1] == pytest.approx(np.pi)
    assert g.refined().n_theta == 129
    assert g.refined().h == pytest.approx(g.h / 2)
    ll = Grid.latlon(16)
    assert ll.shape == (16, 32)
    assert ll.theta[0] == pytest.approx(np.pi / 32)
    assert ll.refined().shape == (32, 64)
    with pytest.raises(DomainError):
        Grid.latlon(16, 33)
    with pytest.raises(DomainError):
        Grid.axisymmetric(4)


def test_grid_is_immutable():
    g = Grid.axisymmetric(17)
    with pytest.raises(ValueError):
        g.theta[0] = 1.0


def test_constant_field_has_zero_derivatives():
    for g in (Grid.axisymmetric(33), Grid.latlon(16)):
        (g1, g2), (h11, h12, h22) = sphgrid.derivatives(g, np.full(g.shape, 2.5))
        for arr in (g1, g2, h11, h12, h22):
            assert np.abs(arr).max() < 1e-12


def _axisym_errors(n):
    g = Grid.axisymmetric(n)
    t = g.theta
    (g1, _), (h11, _, h22) = sphgrid.derivatives(g, np.cos(t))
    # f = cos t: grad = -sin t, H11 = -cos t, H22 = cot t * (-sin t) = -cos t
    return (np.abs(g1 + np.sin(t)).max(), np.abs(h11 + np.cos(t)).max(), np.abs(h22 + np.cos(t)).max())


def test_axisymmetric_second_order():
    coarse, fine = _axisym_errors(65), _axisym_errors(129)
    for c, f in zip(coarse, fine):
        assert 3.5 < c / f < 4.5


def test_latlon_gradient_and_hessian():
    # f = sin t cos p (the x coordinate): grad = (cos t cos p, -sin p), Hess = -f * identity
    errs = []
    for n in (32, 64):
        g = Grid.latlon(n)
        t, p = g.mesh()
        f = np.sin(t) * np.cos(p)
        (g1, g2), (h11, h12, h22) = sphgrid.derivatives(g, f)
        band = (t > 0.3) & (t < np.pi - 0.3)
        errs.append([
            np.abs(g1 - np.cos(t) * np.cos(p))[band].max(),
            np.abs(g2 + np.sin(p))[band].max(),
            np.abs(h11 + f)[band].max(),
            np.abs(h12)[band].max(),
            np.abs(h22 + f)[band].max(),
        ])
    ratios = np.array(errs[0]) / np.array(errs[1])
    assert np.all((ratios > 3.5) & (ratios < 4.5)), ratios


@settings(max_examples=25)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_derivatives_linear(a, b):
    g = Grid.latlon(12)
    t, p = g.mesh()
    f1, f2 = np.cos(t), np.sin(t) * np.sin(p) + t**2
    d1, d2, d12 = (sphgrid.derivatives(g, f) for f in (f1, f2, a * f1 + b * f2))
    for part in (0, 1):
        for x, y, z in zip(d1[part], d2[part], d12[part]):
            np.testing.assert_allclose(z, a * x + b * y, atol=1e-9 * (1 + abs(a) + abs(b)) / g.h**2)


def test_hessian_trace_is_laplacian():
    for g in (Grid.axisymmetric(33), Grid.latlon(16)):
        t, p = g.mesh()
        f = np.exp(np.cos(t)) + np.sin(t) ** 2 * np.cos(2 * p)
        h11, _, h22 = sphgrid.hessian(g, f)
        np.testing.assert_allclose(h11 + h22, sphgrid.laplacian(g, f), atol=1e-10)


def test_laplacian_eigenfunction():
    # Y_2^0 is an eigenfunction with eigenvalue -6
    errs = []
    for n in (32, 64):
        g = Grid.latlon(n)
        t, _ = g.mesh()
        f = 3 * np.cos(t) ** 2 - 1
        errs.append(np.abs(sphgrid.laplacian(g, f) + 6 * f).max())
    assert errs[1] < 0.02
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_layouts_agree_at_shared_nodes():
    n = 32
    ll = Grid.latlon(n)
    ax = Grid.axisymmetric(4 * n + 1)
    ax_idx = np.arange(n) * 4 + 2
    np.testing.assert_allclose(ax.theta[ax_idx], ll.theta)
    prof = lambda t: np.cos(t) + 0.3 * np.cos(2 * t)
    (ag1, _), (ah11, _, ah22) = sphgrid.derivatives(ax, prof(ax.theta))
    (lg1, lg2), (lh11, lh12, lh22) = sphgrid.derivatives(ll, prof(ll.mesh()[0]))
    # both approximate the same smooth quantity; latlon has twice the spacing
    band = slice(2, n - 2)
    for a, l in ((ag1, lg1), (ah11, lh11), (ah22, lh22)):
        np.testing.assert_allclose(l[band, 0], a[ax_idx][band], atol=ll.h**2)
    assert np.abs(lg2).max() < 1e-12 and np.abs(lh12).max() < 1e-12


def test_reduce():
    g = Grid.axisymmetric(9)
    f = np.linspace(-3, 2, 9)
    assert sphgrid.reduce(g, f, "min") == -3.0
    assert sphgrid.reduce(g, f, "max") == 2.0
    assert sphgrid.reduce(g, f, "maxabs") == 3.0
    with pytest.raises(DomainError):
        sphgrid.reduce(g, f, "mean")
    with pytest.raises(DomainError):
        sphgrid.reduce(g, np.ones(8), "min")
    f[3] = np.nan
    with pytest.raises(DomainError):
        sphgrid.reduce(g, f, "min")
