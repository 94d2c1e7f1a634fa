"""Monte Carlo estimation of path-sup moments of the L2 norm.

Each report estimates E[sup_{t<=T} ||u(t)||^p] over an ensemble of solver
paths whose noise seeds derive from one master seed through the documented
per-path derivation, so reruns with the same configuration are bit-identical.
On top of the plain estimator sit three structured probes: how the moments of
the pure stochastic convolution scale in the diffusion amplitude, whether an
epsilon-weighted split between the sup term and the time integral is feasible,
and whether mollifying the drift leaves the moments bounded uniformly in the
mollification level.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .coefficients import (
    DiffusionSpec, DriftSpec, MollifiedDrift, MollifierParams, mollify,
)
from .fields import Field
from .noise import derive_path_seed, sample_noise
from .solver import DEFAULT_BLOWUP_THRESHOLD, Grid, solve_l2_ensemble

__all__ = [
    "MomentReport", "mc_sup_moment", "convolution_scaling_report",
    "epsilon_split_report", "mollified_uniformity_report",
    "restart_window_report",
]

# paths simulated per batch; bounds the resident noise array
_CHUNK = 128

CONSTANT_FEASIBILITY_CAP = 1.0e9


def _describe(obj) -> str:
    """Stable text form of a coefficient argument for config fingerprints."""
    if obj is None:
        return "none"
    if isinstance(obj, (int, float)):
        return repr(float(obj))
    if isinstance(obj, (DriftSpec, DiffusionSpec)):
        return repr(obj)
    if isinstance(obj, MollifiedDrift):
        return f"mollified[n={obj.params.n}]:{obj.spec!r}"
    return f"callable:{getattr(obj, '__name__', type(obj).__name__)}"


def _fingerprint(**config) -> str:
    blob = ";".join(f"{k}={v}" for k, v in sorted(config.items()))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class MomentReport:
    p: float
    T: float
    ensemble: int
    estimate: float          # nan when every path blew up
    std_error: float
    blowup_fraction: float
    fingerprint: str

    def __post_init__(self):
        if self.p < 1.0:
            raise ValueError("moment order must be >= 1")
        if self.ensemble < 1:
            raise ValueError("ensemble must be positive")
        if not 0.0 <= self.blowup_fraction <= 1.0:
            raise ValueError("blowup_fraction must lie in [0, 1]")
        if math.isfinite(self.estimate) and self.estimate < 0.0:
            raise ValueError("estimate must be nonnegative")
        if math.isfinite(self.std_error) and self.std_error < 0.0:
            raise ValueError("std_error must be nonnegative")

    @property
    def valid(self) -> bool:
        return math.isfinite(self.estimate)


def _path_reductions(drift, diffusion, u0: Field, grid: Grid, ensemble: int,
                     master_seed: int, threshold: float, terminal: bool):
    """Per-path sup (or terminal) L2 norm and blow-up flags.

    Reductions run in path-index order; chunking only bounds memory."""
    if diffusion is None:
        # deterministic: every path is the same solve
        Xi = np.zeros((1, grid.n_modes, grid.n_steps))
        l2, b, _ = solve_l2_ensemble(u0, drift, diffusion, grid, Xi, threshold)
        value = l2[0, -1] if terminal else float(np.max(l2[0]))
        return np.full(ensemble, value), np.full(ensemble, bool(b[0]))
    out = np.empty(ensemble)
    blown = np.zeros(ensemble, dtype=bool)
    for lo in range(0, ensemble, _CHUNK):
        hi = min(lo + _CHUNK, ensemble)
        Xi = np.stack([
            sample_noise(derive_path_seed(master_seed, i), grid.n_modes,
                         grid.n_steps, grid.dt).increments
            for i in range(lo, hi)])
        l2, b, _ = solve_l2_ensemble(u0, drift, diffusion, grid, Xi, threshold)
        blown[lo:hi] = b
        out[lo:hi] = l2[:, -1] if terminal else np.max(l2, axis=1)
    return out, blown


def _estimate(values: np.ndarray, alive: np.ndarray, p: float):
    if not alive.any():
        return math.nan, math.nan
    x = values[alive] ** p
    est = float(np.mean(x))
    se = float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else math.nan
    return est, se


def mc_sup_moment(p: float, drift, diffusion, u0: Field, grid: Grid,
                  ensemble: int, master_seed: int,
                  threshold: float = DEFAULT_BLOWUP_THRESHOLD,
                  terminal: bool = False) -> MomentReport:
    """Estimate E[sup_{t<=T} ||u(t)||^p] over `ensemble` independently seeded
    paths. Path i uses the noise seed derived from (master_seed, i).

    The sup runs over every computed step including t = 0. Blown-up paths are
    excluded from the estimate and counted in blowup_fraction; if every path
    blows up the estimate is nan (report invalid). terminal=True replaces the
    running sup by the final-time norm, which is what the additive-noise
    variance identity pins down exactly.
    """
    if p < 1.0:
        raise ValueError("moment order must be >= 1")
    if ensemble < 30:
        raise ValueError("ensemble must be >= 30 for a meaningful standard error")
    if u0.n != grid.n_modes:
        raise ValueError("field resolution does not match the grid")
    values, blown = _path_reductions(drift, diffusion, u0, grid, ensemble,
                                     master_seed, threshold, terminal)
    est, se = _estimate(values, ~blown, p)
    fp = _fingerprint(
        p=p, T=grid.T, n_modes=grid.n_modes, n_steps=grid.n_steps,
        ensemble=ensemble, master_seed=master_seed, threshold=threshold,
        terminal=terminal, drift=_describe(drift),
        diffusion=_describe(diffusion),
        u0=hashlib.sha256(u0.coeffs.tobytes()).hexdigest()[:12])
    return MomentReport(p=float(p), T=grid.T, ensemble=ensemble, estimate=est,
                        std_error=se, blowup_fraction=float(np.mean(blown)),
                        fingerprint=fp)


def _constant_field_norm(grid: Grid, value: float) -> float:
    return Field.from_values(np.full(grid.n_x, value)).l2_norm()


def convolution_scaling_report(p: float, sigma_base: float,
                               lambdas: Sequence[float], grid: Grid,
                               ensemble: int, master_seed: int,
                               threshold: float = DEFAULT_BLOWUP_THRESHOLD):
    """Scaling skeleton of the pure stochastic convolution for p > 8.

    With zero drift, zero initial data, and constant diffusion lam * sigma_base
    under common noise seeds, LHS(lam) = E[sup_t ||u_lam(t)||^p] must follow
    the exact power law LHS(lam)/LHS(1) = lam^p, and the ratio of LHS to
    RHS(lam) = int_0^T ||lam sigma_base||^p dt is one lam-free constant.
    Returns one row per requested lam with both diagnostics.
    """
    if p <= 8.0:
        raise ValueError("the scaling skeleton needs moment order p > 8")
    if not sigma_base > 0.0:
        raise ValueError("sigma_base must be positive")
    lam_list = [float(lam) for lam in lambdas]
    if any(lam <= 0.0 for lam in lam_list):
        raise ValueError("scaling factors must be positive")
    u0 = Field.zero(grid.n_modes)

    def lhs(lam: float) -> float:
        sup, blown = _path_reductions(None, lam * sigma_base, u0, grid,
                                      ensemble, master_seed, threshold, False)
        if blown.any():
            raise RuntimeError("a pure-convolution path breached the blow-up "
                               "threshold; the configuration is off scale")
        return float(np.mean(sup ** p))

    base = lhs(1.0)
    norm1 = _constant_field_norm(grid, sigma_base)
    rows = []
    for lam in lam_list:
        left = base if lam == 1.0 else lhs(lam)
        right = grid.T * (lam * norm1) ** p
        over_base = left / base
        rows.append({
            "lam": lam,
            "lhs": left,
            "rhs": right,
            "ratio": left / right,
            "lhs_over_base": over_base,
            "power_rel_err": abs(over_base - lam ** p) / lam ** p,
        })
    return rows


def epsilon_split_report(p: float, epsilons: Sequence[float],
                         sigma_value: float, grid: Grid, ensemble: int,
                         master_seed: int,
                         cap: float = CONSTANT_FEASIBILITY_CAP):
    """Feasibility of E[sup conv^p] <= eps E[sup||sigma||^p] + C int term
    for moment orders p <= 8 and constant diffusion.

    For each epsilon the smallest feasible constant is
    C_eps = max(0, (LHS - eps A) / B) with A = ||sigma||^p and
    B = T ||sigma||^p; a row is infeasible when C_eps exceeds the cap.
    C_eps is recorded, not asserted against any target value.
    """
    if not 1.0 <= p <= 8.0:
        raise ValueError("the split holds for moment orders 1 <= p <= 8")
    if sigma_value < 0.0:
        raise ValueError("sigma_value must be nonnegative")
    eps_list = [float(e) for e in epsilons]
    if any(e <= 0.0 for e in eps_list):
        raise ValueError("epsilon values must be positive")
    if sigma_value == 0.0:
        left = 0.0
        A = B = 0.0
    else:
        sup, blown = _path_reductions(None, sigma_value, Field.zero(grid.n_modes),
                                      grid, ensemble, master_seed,
                                      DEFAULT_BLOWUP_THRESHOLD, False)
        if blown.any():
            raise RuntimeError("a pure-convolution path breached the blow-up "
                               "threshold; the configuration is off scale")
        left = float(np.mean(sup ** p))
        norm = _constant_field_norm(grid, sigma_value)
        A = norm ** p
        B = grid.T * norm ** p
    rows = []
    for eps in eps_list:
        slack = left - eps * A
        if slack <= 0.0:
            c_eps = 0.0
        elif B > 0.0:
            c_eps = slack / B
        else:
            c_eps = math.inf
        rows.append({
            "epsilon": eps,
            "lhs": left,
            "sup_term": eps * A,
            "c_epsilon": c_eps,
            "feasible": c_eps <= cap,
        })
    return rows


def mollified_uniformity_report(levels: Sequence[int], p: float,
                                drift_spec: DriftSpec, diffusion, u0: Field,
                                grid: Grid, ensemble: int, master_seed: int,
                                threshold: float = DEFAULT_BLOWUP_THRESHOLD):
    """Moment estimates across mollification levels under common seeds.

    Every level runs the same ensemble with the same per-path seeds, so the
    spread across levels reflects the drift approximation alone. Mollified
    drifts are globally Lipschitz and bounded, so a blow-up at any level means
    the configuration is wrong and raises rather than reports.
    """
    levels = [int(n) for n in levels]
    if any(n < 1 for n in levels):
        raise ValueError("mollification levels must be >= 1")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("levels must be strictly increasing")
    rows = []
    for n in levels:
        bn = mollify(drift_spec, MollifierParams(n=n))
        rep = mc_sup_moment(p, bn, diffusion, u0, grid, ensemble, master_seed,
                            threshold)
        if rep.blowup_fraction > 0.0:
            raise RuntimeError(f"mollified level n={n} produced blow-ups; "
                               "bounded drifts cannot do that in this regime")
        rows.append({"level": n, "estimate": rep.estimate,
                     "std_error": rep.std_error})
    return rows


def restart_window_report(p: float, drift, diffusion, u0: Field, grid: Grid,
                          ensemble: int, master_seed: int,
                          threshold: float = DEFAULT_BLOWUP_THRESHOLD):
    """Moments of the sup over [0, T] and over [T, 2T] from one ensemble run
    on the doubled horizon.

    The scheme is Markov in (state, remaining increments): continuing past T
    is bitwise the same as restarting from u(T) with the time-shifted tail of
    the noise, so a finite first-window moment propagating to a finite
    second-window moment is exactly the restart structure. Returns the pair
    (first_window, second_window) of reports; the first excludes only paths
    that blew up by T, the second excludes all blown paths.
    """
    if p < 1.0:
        raise ValueError("moment order must be >= 1")
    if ensemble < 30:
        raise ValueError("ensemble must be >= 30 for a meaningful standard error")
    if u0.n != grid.n_modes:
        raise ValueError("field resolution does not match the grid")
    K = grid.n_steps
    full = Grid(grid.n_modes, 2.0 * grid.T, 2 * K)
    sup1 = np.empty(ensemble)
    sup2 = np.empty(ensemble)
    blown1 = np.zeros(ensemble, dtype=bool)
    blown2 = np.zeros(ensemble, dtype=bool)
    for lo in range(0, ensemble, _CHUNK):
        hi = min(lo + _CHUNK, ensemble)
        if diffusion is None:
            Xi = np.zeros((hi - lo, full.n_modes, full.n_steps))
        else:
            Xi = np.stack([
                sample_noise(derive_path_seed(master_seed, i), full.n_modes,
                             full.n_steps, full.dt).increments
                for i in range(lo, hi)])
        l2, b, steps = solve_l2_ensemble(u0, drift, diffusion, full, Xi,
                                         threshold)
        sup1[lo:hi] = np.max(l2[:, :K + 1], axis=1)
        sup2[lo:hi] = np.max(l2[:, K:], axis=1)
        blown1[lo:hi] = b & (steps <= K)
        blown2[lo:hi] = b
    common = dict(
        p=p, n_modes=grid.n_modes, n_steps=grid.n_steps, ensemble=ensemble,
        master_seed=master_seed, threshold=threshold,
        drift=_describe(drift), diffusion=_describe(diffusion),
        u0=hashlib.sha256(u0.coeffs.tobytes()).hexdigest()[:12])
    est1, se1 = _estimate(sup1, ~blown1, p)
    est2, se2 = _estimate(sup2, ~blown2, p)
    first = MomentReport(p=float(p), T=grid.T, ensemble=ensemble,
                         estimate=est1, std_error=se1,
                         blowup_fraction=float(np.mean(blown1)),
                         fingerprint=_fingerprint(window="first", T=grid.T,
                                                  **common))
    second = MomentReport(p=float(p), T=2.0 * grid.T, ensemble=ensemble,
                          estimate=est2, std_error=se2,
                          blowup_fraction=float(np.mean(blown2)),
                          fingerprint=_fingerprint(window="second",
                                                   T=2.0 * grid.T, **common))
    return first, second
