"""Variance schedules, the closed-form forward process, SNR curves, and
cross-resolution breakpoint matching.

A schedule tabulates beta_t, alpha_t = 1 - beta_t and the cumulative
product alpha_bar_t for t in {1, ..., T}. The forward process has the
closed form

    x_t = sqrt(alpha_bar_t) * x_0 + sqrt(1 - alpha_bar_t) * eps,

and the pixel-level signal-to-noise ratio of a noisy state is

    SNR = 10 * log10( sum(x_t^2) / sum((x_t - x_0)^2) )  [dB].

Truncation windows at different resolutions are stitched by matching SNR
values: the step at which a higher-resolution curve reaches the SNR of
the lower-resolution window end becomes the next window's start.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .image import as_array, same_kind

DEFAULT_T = 1000
DEFAULT_BETA_START = 1e-4
DEFAULT_BETA_END = 0.02
DESK_T = 200

SNR_GUARD_DB = 3.0  # default tolerance for "no comparable SNR" rejection


@dataclass(frozen=True)
class VarianceSchedule:
    """beta/alpha/alpha-bar tables for one diffusion model.

    Step indices are 1-based (t in {1, ..., T}); arrays are stored
    zero-based, so ``betas[t - 1]`` is the entry for step t.
    """

    T: int
    betas: np.ndarray
    alphas: np.ndarray
    alpha_bars: np.ndarray

    def __post_init__(self):
        if self.T < 2:
            raise ValueError(f"T must be >= 2, got {self.T}")
        for name in ("betas", "alphas", "alpha_bars"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.shape != (self.T,):
                raise ValueError(f"{name} must have shape ({self.T},)")
            object.__setattr__(self, name, arr)
        if np.any(self.betas <= 0.0) or np.any(self.betas >= 1.0):
            raise ValueError("betas must lie strictly inside (0, 1)")
        if np.any(self.alphas != 1.0 - self.betas):
            raise ValueError("alphas must equal 1 - betas exactly")
        if np.any(np.diff(self.alpha_bars) >= 0.0):
            raise ValueError("alpha_bars must be strictly decreasing")
        # consistency of the cumulative product, up to rounding
        recon = np.concatenate(([self.alphas[0]], self.alpha_bars[:-1] * self.alphas[1:]))
        if np.any(np.abs(recon - self.alpha_bars) > 8 * np.finfo(np.float64).eps):
            raise ValueError("alpha_bars inconsistent with cumulative product of alphas")

    def _check_t(self, t: int):
        if not 1 <= t <= self.T:
            raise ValueError(f"step index t={t} outside [1, {self.T}]")

    def beta(self, t: int) -> float:
        self._check_t(t)
        return float(self.betas[t - 1])

    def alpha(self, t: int) -> float:
        self._check_t(t)
        return float(self.alphas[t - 1])

    def alpha_bar(self, t: int) -> float:
        self._check_t(t)
        return float(self.alpha_bars[t - 1])

    def alpha_bar_prev(self, t: int) -> float:
        """alpha_bar_{t-1} with the convention alpha_bar_0 = 1."""
        self._check_t(t)
        return 1.0 if t == 1 else float(self.alpha_bars[t - 2])

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(str(self.T).encode())
        h.update(self.betas.tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class TimeWindow:
    """A contiguous sub-range [t_end, t_begin] of the chain, 1 <= t_end < t_begin <= T."""

    t_begin: int
    t_end: int

    def __post_init__(self):
        if not (1 <= self.t_end < self.t_begin):
            raise ValueError(
                f"window requires 1 <= t_end < t_begin, got t_begin={self.t_begin}, t_end={self.t_end}"
            )

    @property
    def length(self) -> int:
        return self.t_begin - self.t_end

    def validate_against(self, sched: VarianceSchedule):
        if self.t_begin > sched.T:
            raise ValueError(f"t_begin={self.t_begin} exceeds schedule T={sched.T}")


@dataclass(frozen=True)
class SnrCurve:
    """Monte-Carlo SNR-vs-step curve for one resolution; values[i] is SNR at t=i+1."""

    resolution: int
    values: np.ndarray
    mc_samples: int
    stderr: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if self.stderr is not None:
            object.__setattr__(self, "stderr", np.asarray(self.stderr, dtype=np.float64))

    @property
    def T(self) -> int:
        return len(self.values)

    def at(self, t: int) -> float:
        if not 1 <= t <= self.T:
            raise ValueError(f"t={t} outside curve range [1, {self.T}]")
        return float(self.values[t - 1])


def make_linear_schedule(T: int, beta_start: float, beta_end: float) -> VarianceSchedule:
    """Linear beta ramp from beta_start to beta_end over T steps."""
    if T < 2:
        raise ValueError(f"T must be >= 2, got {T}")
    if not 0.0 < beta_start <= beta_end:
        raise ValueError(f"need 0 < beta_start <= beta_end, got {beta_start}, {beta_end}")
    if beta_end >= 1.0:
        raise ValueError(f"beta_end must be < 1, got {beta_end}")
    betas = np.linspace(beta_start, beta_end, T)
    alphas = 1.0 - betas
    alpha_bars = np.cumprod(alphas)
    return VarianceSchedule(T=T, betas=betas, alphas=alphas, alpha_bars=alpha_bars)


def default_schedule(T: int = DEFAULT_T) -> VarianceSchedule:
    """Standard linear schedule; for T != 1000 the endpoints are rescaled by
    1000/T so the total noise budget stays comparable (desk profile T=200)."""
    scale = DEFAULT_T / T
    return make_linear_schedule(T, DEFAULT_BETA_START * scale, DEFAULT_BETA_END * scale)


def forward_sample(x0, t: int, eps, sched: VarianceSchedule):
    """Closed-form forward draw sqrt(ab_t) * x0 + sqrt(1 - ab_t) * eps."""
    x0_arr = as_array(x0)
    eps_arr = as_array(eps)
    if x0_arr.shape != eps_arr.shape:
        raise ValueError(f"shape mismatch: x0 {x0_arr.shape} vs eps {eps_arr.shape}")
    ab = sched.alpha_bar(t)
    out = math.sqrt(ab) * x0_arr + math.sqrt(1.0 - ab) * eps_arr
    return same_kind(x0, out)


def snr(x_t, x0) -> float:
    """Pixel-level SNR in dB: 10 * log10(sum(x_t^2) / sum((x_t - x0)^2)).

    Returns +inf when the images are identical (zero denominator) and
    -inf when x_t is all zero; raises if both sums vanish.
    """
    a = as_array(x_t)
    b = as_array(x0)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    num = float(np.sum(a * a))
    den = float(np.sum((a - b) ** 2))
    if den == 0.0:
        if num == 0.0:
            raise ValueError("SNR undefined: both numerator and denominator are zero")
        return math.inf
    if num == 0.0:
        return -math.inf
    return 10.0 * math.log10(num / den)


def expected_snr_curve(dataset, sched: VarianceSchedule, mc_samples: int,
                       rng_seed: int) -> SnrCurve:
    """Average snr(forward_sample(x0, t, eps), x0) over dataset x draws.

    Deterministic given the seed. Fresh noise is drawn per (image, t, draw).
    """
    if len(dataset) == 0:
        raise ValueError("dataset must be nonempty")
    if mc_samples < 1:
        raise ValueError(f"mc_samples must be >= 1, got {mc_samples}")
    arrays = [as_array(img) for img in dataset]
    shape = arrays[0].shape
    for arr in arrays[1:]:
        if arr.shape != shape:
            raise ValueError("dataset images must share one shape")
    rng = np.random.default_rng(rng_seed)
    T = sched.T
    samples = np.empty((T, len(arrays) * mc_samples))
    for i, x0 in enumerate(arrays):
        for t in range(1, T + 1):
            ab = sched.alpha_bars[t - 1]
            eps = rng.standard_normal((mc_samples,) + shape)
            x_t = math.sqrt(ab) * x0 + math.sqrt(1.0 - ab) * eps
            axes = tuple(range(1, x_t.ndim))
            num = np.sum(x_t * x_t, axis=axes)
            den = np.sum((x_t - x0) ** 2, axis=axes)
            if np.any(den == 0.0):
                # eps identically zero cannot happen for a continuous draw;
                # guard anyway so the curve stays finite
                raise ValueError("degenerate draw produced zero denominator")
            col = i * mc_samples
            samples[t - 1, col:col + mc_samples] = 10.0 * np.log10(num / den)
    values = samples.mean(axis=1)
    n = samples.shape[1]
    stderr = samples.std(axis=1, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(T)
    resolution = shape[0]
    return SnrCurve(resolution=resolution, values=values, mc_samples=mc_samples,
                    stderr=stderr)


def match_breakpoint(target_snr_db: float, high_curve: SnrCurve,
                     guard_db: float = SNR_GUARD_DB) -> int:
    """Step of `high_curve` whose SNR is closest to the target, ties toward
    smaller t (fewer remaining steps). Rejects targets farther than
    `guard_db` from every curve value."""
    values = high_curve.values
    if len(values) == 0:
        raise ValueError("empty SNR curve")
    diffs = np.abs(values - target_snr_db)
    idx = int(np.argmin(diffs))  # argmin returns the first (smallest-t) minimum
    if diffs[idx] > guard_db:
        raise ValueError(
            f"no comparable SNR: target {target_snr_db:.2f} dB is {diffs[idx]:.2f} dB "
            f"from the nearest curve value (guard {guard_db:.2f} dB)"
        )
    return idx + 1


def noise_consistency(x0, sched: VarianceSchedule, t: int, mc_samples: int,
                      rng_seed: int) -> tuple[float, float]:
    """Monte-Carlo mean and variance of forward_sample(x0, t, eps) - x0,
    pooled over all pixels and draws."""
    if mc_samples < 1:
        raise ValueError(f"mc_samples must be >= 1, got {mc_samples}")
    x0_arr = as_array(x0)
    ab = sched.alpha_bar(t)
    rng = np.random.default_rng(rng_seed)
    eps = rng.standard_normal((mc_samples,) + x0_arr.shape)
    diff = math.sqrt(ab) * x0_arr + math.sqrt(1.0 - ab) * eps - x0_arr
    return float(diff.mean()), float(diff.var())
