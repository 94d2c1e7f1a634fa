import numpy as np
import pytest

from logdrift.fields import (
    Field,
    coeffs_to_values,
    nodes,
    simpson_weights,
    sine_matrix,
    values_to_coeffs,
)


def test_sine_matrix_orthogonality():
    for n in (5, 16, 63, 128):
        B = sine_matrix(n)
        assert np.allclose(B @ B, (n + 1) * np.eye(n), atol=1e-10 * (n + 1))


def test_transform_round_trip():
    rng = np.random.default_rng(11)
    v = rng.standard_normal(97)
    back = coeffs_to_values(values_to_coeffs(v))
    assert np.max(np.abs(back - v)) < 1e-12


def test_parseval_norm_agreement():
    f = Field.random_l2(200, norm=3.0, seed=5)
    by_coeffs = np.sqrt(np.sum(f.coeffs**2))
    by_values = np.sqrt(np.sum(f.values**2) / (f.n + 1))
    assert by_coeffs == pytest.approx(by_values, rel=1e-13)
    assert f.l2_norm() == pytest.approx(3.0, rel=1e-12)


def test_single_mode_field_matches_analytic():
    n, k = 31, 3
    f = Field.mode(n, k, amplitude=2.0)
    expect = 2.0 * np.sqrt(2.0) * np.sin(k * np.pi * nodes(n))
    assert np.max(np.abs(f.values - expect)) < 1e-13
    assert f.l2_norm() == pytest.approx(2.0)


def test_field_shape_validation():
    with pytest.raises(ValueError):
        Field(4, values=np.zeros(5))
    with pytest.raises(ValueError):
        Field(4)
    with pytest.raises(ValueError):
        Field.mode(4, 5)


def test_field_arithmetic():
    a = Field.random_l2(50, 1.0, seed=1)
    b = Field.random_l2(50, 2.0, seed=2)
    d = a - b
    assert np.allclose(d.values, a.values - b.values)
    s = 3.0 * a
    assert s.l2_norm() == pytest.approx(3.0, rel=1e-12)


@pytest.mark.parametrize("n_points", [2, 3, 4, 5, 6, 7, 8, 11, 100, 101])
def test_simpson_weights_integrate_cubics_exactly(n_points):
    # 4th-order rule: exact on polynomials of degree <= 3 for any point count
    xs = np.linspace(0.0, 2.0, n_points)
    w = simpson_weights(n_points, xs[1] - xs[0])
    for k, exact in [(0, 2.0), (1, 2.0), (2, 8.0 / 3.0), (3, 4.0)]:
        if n_points == 2 and k >= 2:
            continue  # trapezoid fallback is only first order
        assert w @ xs**k == pytest.approx(exact, rel=1e-12)


def test_simpson_weights_smooth_accuracy():
    xs = np.linspace(0.0, 1.0, 201)
    w = simpson_weights(201, xs[1] - xs[0])
    assert w @ np.exp(xs) == pytest.approx(np.e - 1.0, rel=1e-10)
    xs = np.linspace(0.0, 1.0, 202)  # odd interval count hits the 3/8 tail
    w = simpson_weights(202, xs[1] - xs[0])
    assert w @ np.exp(xs) == pytest.approx(np.e - 1.0, rel=1e-10)


def test_dirichlet_boundary_is_implicit():
    # the sine basis vanishes at both endpoints, so any field extends by 0
    f = Field.random_l2(64, 1.0, seed=9)
    k = np.arange(1, 65)
    for edge in (0.0, 1.0):
        val = np.sum(f.coeffs * np.sqrt(2.0) * np.sin(k * np.pi * edge))
        assert abs(val) < 1e-12
