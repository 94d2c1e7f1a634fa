"""Spatial fields on [0, 1] with Dirichlet boundary, in dual nodal/spectral form.

The working basis is e_n(x) = sqrt(2) sin(n pi x), orthonormal in L2(0, 1).
A field over n interior nodes x_i = i/(n+1) carries nodal values and sine
coefficients linked by the symmetric sine matrix; the two views are exact
inverses of each other up to roundoff, and the discrete L2 norm
(sum of values^2)/(n+1) equals the coefficient norm sum(coeffs^2).
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def sine_matrix(n: int) -> np.ndarray:
    """Return B with B[k, i] = sqrt(2) sin((k+1)(i+1) pi / (n+1)).

    values = coeffs @ B and coeffs = values @ B / (n+1); B is symmetric and
    B @ B = (n+1) I, so the round trip is exact up to roundoff.
    """
    if n < 1:
        raise ValueError("need at least one interior node")
    idx = np.arange(1, n + 1)
    B = np.sqrt(2.0) * np.sin(np.outer(idx, idx) * (np.pi / (n + 1)))
    B.setflags(write=False)
    return B


def nodes(n: int) -> np.ndarray:
    """Interior collocation nodes i/(n+1), i = 1..n."""
    return np.arange(1, n + 1) / (n + 1)


def values_to_coeffs(values: np.ndarray) -> np.ndarray:
    n = values.shape[-1]
    return values @ sine_matrix(n) / (n + 1)


def coeffs_to_values(coeffs: np.ndarray) -> np.ndarray:
    n = coeffs.shape[-1]
    return coeffs @ sine_matrix(n)


def simpson_weights(n_points: int, dx: float) -> np.ndarray:
    """Quadrature weights for n_points equispaced samples with spacing dx.

    Composite Simpson when the interval count is even; otherwise Simpson on
    the leading part plus a 3/8 rule on the last three intervals, keeping
    fourth-order accuracy for any n_points >= 2.
    """
    if n_points < 2:
        raise ValueError("need at least two sample points")
    m = n_points - 1  # interval count
    w = np.zeros(n_points)
    if m == 1:
        w[:] = 0.5
    elif m % 2 == 0:
        w[0] = w[-1] = 1.0 / 3.0
        w[1:-1:2] = 4.0 / 3.0
        w[2:-1:2] = 2.0 / 3.0
    elif m == 3:
        w[:] = [3.0 / 8.0, 9.0 / 8.0, 9.0 / 8.0, 3.0 / 8.0]
    else:
        head = simpson_weights(n_points - 3, 1.0)
        w[: n_points - 3] += head
        w[n_points - 4 :] += [3.0 / 8.0, 9.0 / 8.0, 9.0 / 8.0, 3.0 / 8.0]
    return w * dx


class Field:
    """A Dirichlet field over interior nodes, with lazy nodal/spectral views."""

    __slots__ = ("n", "_values", "_coeffs")

    def __init__(self, n: int, values=None, coeffs=None):
        if values is None and coeffs is None:
            raise ValueError("provide nodal values or sine coefficients")
        self.n = int(n)
        self._values = None if values is None else np.asarray(values, dtype=float)
        self._coeffs = None if coeffs is None else np.asarray(coeffs, dtype=float)
        for arr in (self._values, self._coeffs):
            if arr is not None and arr.shape != (self.n,):
                raise ValueError(f"expected shape ({self.n},), got {arr.shape}")

    @classmethod
    def from_values(cls, values) -> "Field":
        values = np.asarray(values, dtype=float)
        return cls(values.shape[0], values=values)

    @classmethod
    def from_coeffs(cls, coeffs) -> "Field":
        coeffs = np.asarray(coeffs, dtype=float)
        return cls(coeffs.shape[0], coeffs=coeffs)

    @classmethod
    def zero(cls, n: int) -> "Field":
        return cls(n, coeffs=np.zeros(n))

    @classmethod
    def mode(cls, n: int, k: int, amplitude: float = 1.0) -> "Field":
        """The single basis function amplitude * e_k on n nodes."""
        if not 1 <= k <= n:
            raise ValueError("mode index out of range")
        c = np.zeros(n)
        c[k - 1] = amplitude
        return cls(n, coeffs=c)

    @classmethod
    def random_l2(cls, n: int, norm: float, seed: int) -> "Field":
        """A reproducible rough field with prescribed L2 norm.

        Coefficients decay like 1/k so the profile is square integrable but
        not smooth; the draw is fixed by the seed.
        """
        rng = np.random.default_rng(seed)
        c = rng.standard_normal(n) / np.arange(1, n + 1)
        c *= norm / np.sqrt(np.sum(c * c))
        return cls(n, coeffs=c)

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = coeffs_to_values(self._coeffs)
        return self._values

    @property
    def coeffs(self) -> np.ndarray:
        if self._coeffs is None:
            self._coeffs = values_to_coeffs(self._values)
        return self._coeffs

    @property
    def nodes(self) -> np.ndarray:
        return nodes(self.n)

    def l2_norm(self) -> float:
        # Parseval: sum(coeffs^2) == sum(values^2)/(n+1)
        if self._coeffs is not None:
            return float(np.sqrt(np.sum(self._coeffs**2)))
        return float(np.sqrt(np.sum(self._values**2) / (self.n + 1)))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __sub__(self, other: "Field") -> "Field":
        if self.n != other.n:
            raise ValueError("node counts differ")
        return Field(self.n, coeffs=self.coeffs - other.coeffs)

    def __add__(self, other: "Field") -> "Field":
        if self.n != other.n:
            raise ValueError("node counts differ")
        return Field(self.n, coeffs=self.coeffs + other.coeffs)

    def __mul__(self, scalar: float) -> "Field":
        return Field(self.n, coeffs=self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"Field(n={self.n}, l2={self.l2_norm():.6g})"
