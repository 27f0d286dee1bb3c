import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inlslab import GridError, ParameterError, PhysParams, build_grid, integrate, laplacian
from inlslab.grid import FieldPair, gaussian_pair, singular_weight

from oracles import gaussian_laplacian


def test_radial_3d_weights_scale_with_r_squared():
    g = build_grid("radial", 3, 20.0, 512)
    assert g.shape == (512,)
    h = g.h
    # cell volume 4 pi ((r+h/2)^3 - (r-h/2)^3) / 3 = 4 pi (r^2 h + h^3/12)
    expected = 4.0 * np.pi * (g.radius ** 2 * h + h ** 3 / 12.0)
    np.testing.assert_allclose(g.quad_weights, expected, rtol=1e-12)


def test_cartesian_1d_spacing():
    g = build_grid("cartesian", 1, 10.0, 256)
    assert g.spacing[0] == pytest.approx(20.0 / 256, rel=1e-15)
    assert np.allclose(np.diff(g.coords[0]), 20.0 / 256)


def test_cartesian_2d_area():
    g = build_grid("cartesian", 2, 12.0, 256)
    assert abs(g.quad_weights.sum() - 576.0) < 1e-9


@pytest.mark.parametrize("kind,d,counts", [("radial", 2, 300), ("radial", 5, 100), ("cartesian", 2, 64)])
def test_weights_positive_and_volume(kind, d, counts):
    g = build_grid(kind, d, 8.0, counts)
    assert np.all(g.quad_weights > 0)
    if kind == "radial":
        vol = np.pi ** (d / 2) / __import__("math").gamma(d / 2 + 1) * 8.0 ** d
    else:
        vol = 16.0 ** d
    assert abs(g.volume - vol) <= 1e-12 * vol


def test_grid_errors():
    with pytest.raises(GridError):
        build_grid("cartesian", 3, 8.0, 32)
    with pytest.raises(GridError):
        build_grid("radial", 2, 8.0, 8)
    with pytest.raises(GridError):
        build_grid("radial", 2, -1.0, 64)
    with pytest.raises(ParameterError):
        build_grid("radial", 3, 8.0, 64, alpha=1.6)


def test_singular_weight_examples():
    # h = 0.8 puts a cell centre at r = 2
    g = build_grid("radial", 3, 12.8, 16, alpha=1.0)
    idx = int(np.argmin(np.abs(g.radius - 2.0)))
    assert g.radius[idx] == pytest.approx(2.0, rel=1e-15)
    assert g.weight_alpha[idx] == pytest.approx(0.5, rel=1e-15)
    g2 = build_grid("radial", 2, 8.0, 64, alpha=1.0)
    assert g2.weight_alpha[0] == pytest.approx(2.0 / g2.h, rel=1e-14)
    gc = build_grid("cartesian", 2, 8.0, 64, alpha=1.0)
    h = gc.h
    r_min = gc.radius.min()
    assert r_min == pytest.approx(h / np.sqrt(2.0), rel=1e-12)
    assert singular_weight(gc, 1.0).max() == pytest.approx(np.sqrt(2.0) / h, rel=1e-12)


def test_weight_monotone_and_finite():
    for d, a in [(1, 0.5), (2, 1.5), (3, 1.2), (5, 0.4)]:
        g = build_grid("radial", d, 10.0, 400, alpha=a)
        w = g.weight_alpha
        assert np.all(np.isfinite(w)) and np.all(w > 0)
        assert np.all(np.diff(w) <= 0)


def test_laplacian_constant_and_mode():
    g = build_grid("cartesian", 2, 6.0, 64)
    assert np.max(np.abs(laplacian(np.ones(g.shape), g))) < 1e-12
    k = 2 * np.pi * 3 / 12.0
    f = np.exp(1j * k * g.coords[0])
    np.testing.assert_allclose(laplacian(f, g), -k * k * f, atol=1e-11)


def test_radial_laplacian_second_order():
    errs = []
    for n in (200, 400, 800):
        g = build_grid("radial", 3, 8.0, n)
        f = np.exp(-g.radius ** 2)
        ref = gaussian_laplacian(3, g.radius)
        inner = g.radius < 5.0
        errs.append(np.max(np.abs(laplacian(f, g) - ref)[inner]) / np.max(np.abs(ref)))
    for a, b in zip(errs, errs[1:]):
        assert 4.0 * 0.8 <= a / b <= 4.0 * 1.2


def test_integrate_examples():
    g = build_grid("radial", 2, 10.0, 8000)
    assert integrate(np.ones(g.shape), g) == pytest.approx(g.volume, rel=1e-14)
    assert abs(integrate(np.exp(-g.radius ** 2), g) - np.pi) < 1e-6
    assert integrate(np.zeros(g.shape), g) == 0.0


@settings(max_examples=40, deadline=None)
@given(
    a=st.floats(-5, 5, allow_nan=False),
    b=st.floats(-5, 5, allow_nan=False),
    seed=st.integers(0, 2 ** 32 - 1),
)
def test_integrate_linear_positive(a, b, seed):
    rng = np.random.default_rng(seed)
    g = build_grid("radial", 3, 5.0, 64)
    f = rng.random(g.shape)
    h = rng.random(g.shape)
    lhs = integrate(a * f + b * h, g)
    rhs = a * integrate(f, g) + b * integrate(h, g)
    assert abs(lhs - rhs) <= 1e-12 * (abs(a) + abs(b) + 1) * g.volume
    assert integrate(f, g) >= 0


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_spectral_laplacian_self_adjoint(seed):
    rng = np.random.default_rng(seed)
    g = build_grid("cartesian", 2, 5.0, 32)
    f = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    h = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    lhs = integrate(laplacian(f, g) * np.conj(h), g)
    rhs = integrate(f * np.conj(laplacian(h, g)), g)
    nf = np.sqrt(integrate(np.abs(f) ** 2, g))
    nh = np.sqrt(integrate(np.abs(h) ** 2, g))
    assert abs(lhs - rhs) <= 1e-10 * nf * nh * max(1.0, np.max(g.k2))


def test_fieldpair_shape_check():
    g = build_grid("radial", 2, 5.0, 32)
    with pytest.raises(GridError):
        FieldPair(np.zeros(31), np.zeros(32), g)
    s = gaussian_pair(g)
    assert s.is_finite()


def test_params_derived():
    p = PhysParams(5, 0.4)
    assert p.s_c == pytest.approx(0.9)
    assert p.sigma == pytest.approx((6 - 5.8) / (5.8 - 4))
