"""Periodic grids, fields, and spectral operators.

Everything downstream works on a uniform periodic discretization of a
truncated line [-L, L).  Fields are real samples at the nodes; spectral
representations use the real FFT with series coefficients c_j such that

    f(x) = sum_j c_j exp(i k_j x),    k_j = j * pi / L.

With this normalization the discrete Sobolev norm

    ||f||_{H^s}^2 = 2L * sum_j (1 + k_j^2)^s |c_j|^2

reproduces the whole-line norm (the one with the 1/2pi in the frequency
integral) for functions compactly supported inside the domain.  For even
integer s the identification is exact: the spectral sum is the Poisson
summation of a line integral whose integrand has compactly supported
inverse transform.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "Field",
    "BumpSpec",
    "ApproxParams",
    "PHI",
    "PHI_TILDE",
    "make_grid",
    "ds_apply",
    "lambda_inv_apply",
    "x_derivative",
    "sobolev_norm",
    "c1_norm",
    "make_bump",
    "scale_bump",
    "mollify",
    "mollifier_kernel",
]

# Extra self-checks (spectrum-cache consistency) when CHLAB_DEBUG is set.
DEBUG_CHECKS = os.environ.get("CHLAB_DEBUG", "") not in ("", "0")


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [-L, L) with N nodes.

    Parameters
    ----------
    half_length : float
        Half width L of the periodic domain.
    n_points : int
        Number of nodes N; must be even (transform friendly sizes,
        ideally powers of two, keep dx * N == 2L exact).
    """

    half_length: float
    n_points: int

    def __post_init__(self) -> None:
        if self.n_points <= 0 or self.n_points % 2 != 0:
            raise ValueError(f"n_points must be a positive even integer, got {self.n_points}")
        if not self.half_length > 0:
            raise ValueError(f"half_length must be positive, got {self.half_length}")
        dx = 2.0 * self.half_length / self.n_points
        x = -self.half_length + dx * np.arange(self.n_points)
        k = np.arange(self.n_points // 2 + 1) * (np.pi / self.half_length)
        x.setflags(write=False)
        k.setflags(write=False)
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "k", k)

    @property
    def k_max(self) -> float:
        """Largest resolvable wavenumber (N/2) * pi / L."""
        return float(self.k[-1])

    def spectral_weights(self) -> np.ndarray:
        """Multiplicities of the rfft modes in the two-sided spectrum."""
        w = np.full(self.n_points // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w


def make_grid(L: float, N: int) -> Grid:
    """Build the periodic grid on [-L, L) with nodes x_m = -L + m * dx."""
    return Grid(half_length=float(L), n_points=int(N))


class Field:
    """Real-valued samples on a :class:`Grid` with a lazily cached spectrum.

    Fields are immutable: the sample array is write-protected and the
    spectrum cache is filled at most once, so instances are safe to share
    across workers.
    """

    __slots__ = ("grid", "values", "_spectrum")

    def __init__(self, grid: Grid, values: np.ndarray, spectrum: np.ndarray | None = None):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (grid.n_points,):
            raise ValueError(f"values shape {values.shape} does not match grid N={grid.n_points}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_spectrum", spectrum)

    def __setattr__(self, name, value):  # pragma: no cover - guard rail
        raise AttributeError("Field is immutable")

    @property
    def spectrum(self) -> np.ndarray:
        """Series coefficients c_j = rfft(values) / N, cached on first use."""
        if self._spectrum is None:
            c = np.fft.rfft(self.values) / self.grid.n_points
            c.setflags(write=False)
            object.__setattr__(self, "_spectrum", c)
        elif DEBUG_CHECKS:
            fresh = np.fft.rfft(self.values) / self.grid.n_points
            scale = max(float(np.max(np.abs(fresh))), 1e-300)
            if np.max(np.abs(fresh - self._spectrum)) > 1e-12 * scale:
                raise AssertionError("cached spectrum inconsistent with values")
        return self._spectrum

    @classmethod
    def from_spectrum(cls, grid: Grid, spectrum: np.ndarray) -> "Field":
        vals = np.fft.irfft(spectrum * grid.n_points, n=grid.n_points)
        spectrum = np.asarray(spectrum, dtype=np.complex128).copy()
        spectrum.setflags(write=False)
        return cls(grid, vals, spectrum=spectrum)


def _symbol_apply(f: Field, symbol: np.ndarray, zero_nyquist: bool = False) -> Field:
    c = f.spectrum * symbol
    if zero_nyquist:
        c = c.copy()
        c[-1] = 0.0
    return Field.from_spectrum(f.grid, c)


def ds_apply(f: Field, s_exp: float) -> Field:
    """Apply the Bessel-potential operator with symbol (1 + k^2)^(s/2).

    Linear, and exactly composable: applying exponents a then b equals
    applying a + b up to spectral round-off.
    """
    g = f.grid
    return _symbol_apply(f, (1.0 + g.k**2) ** (s_exp / 2.0))


def x_derivative(f: Field, order: int = 1) -> Field:
    """Spectral derivative d^order/dx^order (odd orders zero the Nyquist mode)."""
    g = f.grid
    return _symbol_apply(f, (1j * g.k) ** order, zero_nyquist=(order % 2 == 1))


def lambda_inv_apply(f: Field) -> Field:
    """Apply the order -1 operator with symbol i*k / (1 + k^2).

    Identical to x_derivative(ds_apply(f, -2)); smooths in the sense that
    the H^1 norm of the output never exceeds the L^2 norm of the input.
    """
    g = f.grid
    return _symbol_apply(f, 1j * g.k / (1.0 + g.k**2), zero_nyquist=True)


def sobolev_norm(f: Field, s_exp: float) -> float:
    """Discrete H^s norm, sqrt(2L * sum (1 + k^2)^s |c_j|^2)."""
    g = f.grid
    c = f.spectrum
    total = np.sum(g.spectral_weights() * (1.0 + g.k**2) ** s_exp * np.abs(c) ** 2)
    return float(np.sqrt(2.0 * g.half_length * total))


def c1_norm(f: Field) -> float:
    """sup |f| + sup |f'| over the nodes, with a spectral derivative."""
    return float(np.max(np.abs(f.values)) + np.max(np.abs(x_derivative(f).values)))


@dataclass(frozen=True)
class BumpSpec:
    """Radii of a smooth plateau cutoff: 1 on |x| <= a, 0 on |x| >= b."""

    inner_radius: float
    outer_radius: float

    def __post_init__(self) -> None:
        if not (0 < self.inner_radius < self.outer_radius):
            raise ValueError(
                f"need 0 < inner_radius < outer_radius, got ({self.inner_radius}, {self.outer_radius})"
            )

    def profile(self, y: np.ndarray) -> np.ndarray:
        """Evaluate the cutoff at arbitrary points.

        Built from g(t) = exp(-1/t): the value on the transition band is
        g(b - |y|) / (g(b - |y|) + g(|y| - a)).  Exactly 1.0 inside the
        plateau and exactly 0.0 outside the support, at every point.
        """
        y = np.asarray(y, dtype=np.float64)
        out = np.zeros_like(y)
        ay = np.abs(y)
        out[ay <= self.inner_radius] = 1.0
        mid = (ay > self.inner_radius) & (ay < self.outer_radius)
        g_out = np.exp(-1.0 / (self.outer_radius - ay[mid]))
        g_in = np.exp(-1.0 / (ay[mid] - self.inner_radius))
        out[mid] = g_out / (g_out + g_in)
        return out


# The two cutoffs the construction uses: the packet envelope and the wider
# plateau that equals 1 on the envelope's support.
PHI = BumpSpec(1.0, 2.0)
PHI_TILDE = BumpSpec(2.0, 3.0)


def make_bump(spec: BumpSpec, grid: Grid) -> Field:
    """Sample the cutoff on the grid; support must fit in the domain."""
    if spec.outer_radius >= grid.half_length:
        raise ValueError(
            f"bump support radius {spec.outer_radius} does not fit in domain half-length {grid.half_length}"
        )
    return Field(grid, spec.profile(grid.x))


def scale_bump(spec: BumpSpec, scale: float, grid: Grid) -> Field:
    """Sample the dilated cutoff x -> bump(x / scale) on the grid.

    The dilated support radius scale * outer_radius must not exceed the
    domain half-length.
    """
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    if scale * spec.outer_radius > grid.half_length:
        raise ValueError(
            f"dilated support radius {scale * spec.outer_radius} exceeds domain half-length {grid.half_length}"
        )
    return Field(grid, spec.profile(grid.x / scale))


def mollifier_kernel(grid: Grid, eps: float) -> np.ndarray:
    """Sampled kernel (1/eps) j(x/eps), renormalized so dx * sum == 1.

    j is the unit-mass smooth bump supported on [-1, 1]; the discrete
    renormalization makes convolution preserve constants exactly.  The
    samples are indexed by periodic displacement (peak at index 0), the
    layout circular convolution expects.
    """
    if eps < 2.0 * grid.dx:
        raise ValueError(f"eps={eps} below grid resolution (need eps >= 2*dx = {2 * grid.dx})")
    y = grid.x / eps
    j = np.zeros_like(y)
    m = np.abs(y) < 1.0
    j[m] = np.exp(-1.0 / (1.0 - y[m] ** 2))
    j /= grid.dx * np.sum(j)
    return np.roll(j, -(grid.n_points // 2))


def mollify(f: Field, eps: float) -> Field:
    """Convolve with the rescaled unit-mass bump (circular convolution)."""
    g = f.grid
    j = mollifier_kernel(g, eps)
    c = np.fft.rfft(f.values) * np.fft.rfft(j) * g.dx
    return Field(g, np.fft.irfft(c, n=g.n_points))


def rho_exponent(s: float, delta: float) -> float:
    """Supremum-bound decay exponent min(1 - delta/2, delta/2 + s - 2)."""
    return min(1.0 - delta / 2.0, delta / 2.0 + s - 2.0)


@dataclass(frozen=True)
class ApproxParams:
    """Parameters (omega, lambda, delta, s) of one approximate-solution member."""

    omega: float
    lam: float
    delta: float
    s: float

    def __post_init__(self) -> None:
        if not self.lam >= 1.0:
            raise ValueError(f"lam must be >= 1, got {self.lam}")
        if not (1.0 < self.delta < 2.0):
            raise ValueError(
                f"delta={self.delta} violates 1 < delta < 2 "
                "(delta < 2 keeps the low-frequency data small; "
                "delta > 1 keeps the supremum decay exponent positive)"
            )
        if not self.s > 1.5:
            raise ValueError(f"s={self.s} violates the regularity constraint s > 3/2")
        rho = rho_exponent(self.s, self.delta)
        if not rho > 0:
            raise ValueError(
                f"rho = min(1 - delta/2, delta/2 + s - 2) = {rho} must be positive "
                f"for (s, delta) = ({self.s}, {self.delta})"
            )

    @property
    def dilation(self) -> float:
        """Envelope dilation factor lambda^delta."""
        return self.lam**self.delta

    @property
    def r_exponent(self) -> float:
        """Residual decay exponent s - delta/2."""
        return self.s - self.delta / 2.0

    @property
    def rho(self) -> float:
        return rho_exponent(self.s, self.delta)

    @property
    def eps_exponent(self) -> float:
        """H^s difference decay exponent (1 - delta/2) / (s + 2)."""
        return (1.0 - self.delta / 2.0) / (self.s + 2.0)
