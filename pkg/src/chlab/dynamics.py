"""Time integration of the nonlocal shallow-water equation.

The evolution solved here is

    du/dt = -u u_x - P[u^2 + (1/2) u_x^2],

where P is the order -1 operator with Fourier symbol i*k / (1 + k^2).
Every term is quadratic, so constants are steady states and small data
evolve slowly.  Products are formed pointwise after zeroing the top
spectral band of each factor (2/3-rule inputs), which keeps the resolved
modes alias-free; the state itself is never filtered, so the energy
fraction in the dealias band is an honest resolution diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .spectral import Field, Grid, c1_norm, sobolev_norm, x_derivative

__all__ = [
    "SolverConfig",
    "Trajectory",
    "TrajectorySample",
    "BlowupError",
    "ch_rhs",
    "step_rk4",
    "solve",
    "lifespan_estimate",
    "energy_monitor",
    "EnergyReport",
    "trajectory_to_csv_rows",
]

SUP_FLOOR = 1e-8  # floor for the CFL denominator on near-zero states


class BlowupError(RuntimeError):
    """Raised when a blow-up flag must be escalated to a hard failure."""


@dataclass(frozen=True)
class SolverConfig:
    """Step control and diagnostics for :func:`solve`."""

    cfl: float = 0.3
    dealias_fraction: float = 2.0 / 3.0
    t_end: float = 1.0
    record_every: float = 0.25
    blowup_c1_threshold: float = 1e6

    def __post_init__(self) -> None:
        if not (0.0 < self.cfl <= 1.0):
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if not (0.5 < self.dealias_fraction <= 1.0):
            raise ValueError(f"dealias_fraction must lie in (0.5, 1], got {self.dealias_fraction}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if not (0.0 < self.record_every <= self.t_end):
            raise ValueError(f"record_every must lie in (0, t_end], got {self.record_every}")
        if not self.blowup_c1_threshold > 0:
            raise ValueError("blowup_c1_threshold must be positive")


@dataclass(frozen=True)
class TrajectorySample:
    """Per-sample diagnostics recorded alongside each stored state."""

    t: float
    hs_norm: float
    c1_norm: float
    dt_used: float
    band_fraction: float


@dataclass
class Trajectory:
    """Recorded states and diagnostics of one solve, immutable once returned."""

    grid: Grid
    s_monitor: float
    times: list[float]
    states: list[Field]
    diagnostics: list[TrajectorySample]
    blowup: bool = False
    blowup_time: float | None = None
    forcing_used: bool = False
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if list(self.times) != sorted(set(self.times)):
            raise ValueError("trajectory times must be strictly increasing")
        if len(self.states) != len(self.diagnostics) or len(self.states) != len(self.times):
            raise ValueError("one state and one diagnostics record per sample")
        self._index = {round(t, 9): i for i, t in enumerate(self.times)}

    def state_at(self, t: float) -> Field:
        """Return the recorded state at sample time t (must be recorded)."""
        i = self._index.get(round(t, 9))
        if i is None:
            raise KeyError(f"t={t} is not a recorded sample (recorded: {self.times})")
        return self.states[i]

    def has_time(self, t: float) -> bool:
        return round(t, 9) in self._index


class _RhsKernel:
    """Precomputed symbols for the right-hand side on one grid."""

    def __init__(self, grid: Grid, dealias_fraction: float | None):
        k = grid.k
        self.grid = grid
        self.n = grid.n_points
        self.deriv = (1j * k).astype(np.complex128)
        self.deriv[-1] = 0.0
        self.nonlocal_sym = (1j * k / (1.0 + k**2)).astype(np.complex128)
        self.nonlocal_sym[-1] = 0.0
        if dealias_fraction is None:
            self.mask = None
        else:
            self.mask = (k < dealias_fraction * grid.k_max).astype(np.float64)

    def __call__(self, vals: np.ndarray) -> np.ndarray:
        c = np.fft.rfft(vals)
        if self.mask is not None:
            c = c * self.mask
        u = np.fft.irfft(c, n=self.n)
        ux = np.fft.irfft(self.deriv * c, n=self.n)
        q = u * u + 0.5 * (ux * ux)
        return -(u * ux) - np.fft.irfft(self.nonlocal_sym * np.fft.rfft(q), n=self.n)


def ch_rhs(u: Field, dealias_fraction: float | None = 2.0 / 3.0) -> Field:
    """Evaluate -u u_x - P[u^2 + (1/2) u_x^2] at one instant.

    With ``dealias_fraction`` set, both product factors are band-limited
    to that fraction of k_max before multiplying; pass ``None`` for plain
    pointwise products (used by one-shot residual algebra).
    """
    out = _RhsKernel(u.grid, dealias_fraction)(u.values)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite values in right-hand side evaluation")
    return Field(u.grid, out)


RhsFunc = Callable[[Field, float], Field]


def step_rk4(u: Field, dt: float, rhs: RhsFunc | None = None, t: float = 0.0) -> Field:
    """One classical four-stage Runge-Kutta step of the evolution."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if rhs is None:
        rhs = lambda w, _t: ch_rhs(w)
    k1 = rhs(u, t).values
    k2 = rhs(Field(u.grid, u.values + 0.5 * dt * k1), t + 0.5 * dt).values
    k3 = rhs(Field(u.grid, u.values + 0.5 * dt * k2), t + 0.5 * dt).values
    k4 = rhs(Field(u.grid, u.values + dt * k3), t + dt).values
    out = u.values + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite state after RK4 step")
    return Field(u.grid, out)


def _band_fraction(vals: np.ndarray, grid: Grid, dealias_fraction: float) -> float:
    c = np.fft.rfft(vals)
    w = grid.spectral_weights()
    e = w * np.abs(c) ** 2
    total = float(np.sum(e))
    if total == 0.0:
        return 0.0
    band = grid.k >= dealias_fraction * grid.k_max
    return float(np.sum(e[band]) / total)


def solve(
    u0: Field,
    cfg: SolverConfig,
    s_monitor: float,
    forcing: Callable[[float], np.ndarray] | None = None,
) -> Trajectory:
    """Integrate to t_end recording states at multiples of record_every.

    The step obeys dt = cfl * dx / max(sup|u|, 1e-8), clipped so that
    every record time is hit exactly.  If the C^1 norm (checked at record
    times; the sup part every step) exceeds the blow-up threshold the run
    stops early with the blow-up flag set -- a reported outcome, not an
    exception.
    """
    grid = u0.grid
    kernel = _RhsKernel(grid, cfg.dealias_fraction)

    n_rec = int(np.floor(cfg.t_end / cfg.record_every + 1e-9))
    targets = [i * cfg.record_every for i in range(1, n_rec + 1)]
    if not targets or targets[-1] < cfg.t_end - 1e-12:
        targets.append(cfg.t_end)

    if forcing is None:
        def rhs_vals(vals: np.ndarray, t: float) -> np.ndarray:
            return kernel(vals)
    else:
        def rhs_vals(vals: np.ndarray, t: float) -> np.ndarray:
            return kernel(vals) + forcing(t)

    u = u0.values.copy()
    t = 0.0
    times: list[float] = []
    states: list[Field] = []
    diags: list[TrajectorySample] = []
    blowup = False
    blowup_time: float | None = None

    def record(t_now: float, vals: np.ndarray, dt_used: float) -> float:
        f = Field(grid, vals)
        hs = sobolev_norm(f, s_monitor)
        c1 = c1_norm(f)
        band = _band_fraction(vals, grid, cfg.dealias_fraction)
        times.append(t_now)
        states.append(f)
        diags.append(TrajectorySample(t_now, hs, c1, dt_used, band))
        return c1

    c1 = record(0.0, u, 0.0)
    if c1 > cfg.blowup_c1_threshold:
        blowup, blowup_time = True, 0.0

    ti = 0
    while not blowup and ti < len(targets):
        target = targets[ti]
        while t < target - 1e-12:
            sup = max(float(np.max(np.abs(u))), SUP_FLOOR)
            if sup > cfg.blowup_c1_threshold:
                blowup, blowup_time = True, t
                break
            dt = min(cfg.cfl * grid.dx / sup, cfg.record_every)
            if t + dt > target - 1e-12:
                dt = target - t
            k1 = rhs_vals(u, t)
            k2 = rhs_vals(u + 0.5 * dt * k1, t + 0.5 * dt)
            k3 = rhs_vals(u + 0.5 * dt * k2, t + 0.5 * dt)
            k4 = rhs_vals(u + dt * k3, t + dt)
            u = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += dt
            if not np.all(np.isfinite(u)):
                raise FloatingPointError(f"non-finite state at t={t}")
        if blowup:
            break
        t = target  # absorb accumulated round-off at the record point
        c1 = record(t, u, dt)
        if c1 > cfg.blowup_c1_threshold:
            blowup, blowup_time = True, t
            break
        ti += 1

    return Trajectory(
        grid=grid,
        s_monitor=s_monitor,
        times=times,
        states=states,
        diagnostics=diags,
        blowup=blowup,
        blowup_time=blowup_time,
        forcing_used=forcing is not None,
    )


def lifespan_estimate(u0: Field, s_exp: float, c_s_cal: float) -> float:
    """Advisory existence-time lower bound 1 / (2 c ||u0||_{H^s})."""
    if not c_s_cal > 0:
        raise ValueError(f"c_s_cal must be positive, got {c_s_cal}")
    n = sobolev_norm(u0, s_exp)
    if n == 0.0:
        raise ValueError("lifespan estimate undefined for zero initial data")
    return 1.0 / (2.0 * c_s_cal * n)


@dataclass(frozen=True)
class EnergySample:
    t: float
    quotient: float | None
    annotation: str = ""


@dataclass(frozen=True)
class EnergyReport:
    """Discrete quotients (1/2) d/dt ||u||^2 / (||u||_C1 ||u||^2) per interior sample."""

    s_exp: float
    samples: tuple[EnergySample, ...]
    c_s_empirical: float | None


def energy_monitor(traj: Trajectory, s_exp: float) -> EnergyReport:
    """Estimate the energy-inequality constant from a recorded trajectory."""
    if len(traj.times) < 3:
        raise ValueError("energy monitor needs at least 3 recorded samples")
    if traj.s_monitor == s_exp:
        hs = [d.hs_norm for d in traj.diagnostics]
    else:
        hs = [sobolev_norm(st, s_exp) for st in traj.states]
    c1 = [d.c1_norm for d in traj.diagnostics]
    ts = traj.times
    samples: list[EnergySample] = []
    quotients: list[float] = []
    for i in range(1, len(ts) - 1):
        e_prev, e_here, e_next = hs[i - 1] ** 2, hs[i] ** 2, hs[i + 1] ** 2
        denom = c1[i] * e_here
        if denom == 0.0:
            samples.append(EnergySample(ts[i], None, "zero-norm sample skipped"))
            continue
        de_dt = (e_next - e_prev) / (ts[i + 1] - ts[i - 1])
        q = 0.5 * de_dt / denom
        quotients.append(q)
        samples.append(EnergySample(ts[i], q))
    c_emp = max(quotients) if quotients else None
    return EnergyReport(s_exp=s_exp, samples=tuple(samples), c_s_empirical=c_emp)


def trajectory_to_csv_rows(traj: Trajectory) -> list[tuple]:
    """Rows (t, hs_norm, c1_norm, dt, blowup_flag) for the optional dump."""
    return [
        (d.t, d.hs_norm, d.c1_norm, d.dt_used, int(traj.blowup and traj.blowup_time is not None and d.t >= traj.blowup_time))
        for d in traj.diagnostics
    ]
