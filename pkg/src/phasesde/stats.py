"""Batch statistics, observable time series, and blow-up detection."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import oracle
from .core import EnsembleResult, MethodSpec
from .representations import OBSERVABLE_NAMES, observable_estimate_complex

__all__ = [
    "ObservableSeries",
    "batch_mean_se",
    "observable_series",
    "correlation_series",
    "detect_blowup",
]


def batch_mean_se(values) -> tuple:
    """Mean and standard error from per-batch values.

    The standard error is the ddof=1 standard deviation of the batch means
    divided by sqrt(B).  Non-finite entries (dead batches) are dropped;
    fewer than two finite values leave no spread to estimate, which is an
    error.
    """
    arr = np.asarray(values, dtype=float).ravel()
    finite = arr[np.isfinite(arr)]
    if finite.size < 2:
        raise ValueError(
            "batch_mean_se needs at least two finite batch values, got "
            f"{finite.size}")
    return float(finite.mean()), float(finite.std(ddof=1) / math.sqrt(finite.size))


@dataclass
class ObservableSeries:
    """One observable's estimate against time, with batch standard errors.

    ``exact`` carries the closed-form curve when the run's coupling
    schedule admits one (constant, or switched off once), else None.
    ``n_batches_used`` counts the batches contributing at each sample;
    it drops below the configured count when batches die out or, for the
    correlation, when a batch's variance estimate is not positive.
    """

    name: str
    method: str
    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    live_fraction: np.ndarray
    n_batches_used: np.ndarray
    exact: np.ndarray | None = None

    @property
    def stderr_reliable(self) -> np.ndarray:
        """False from the first sample where any trajectory has died.

        Batch spread only measures sampling error while every trajectory
        still contributes; after the first loss the estimate is biased by
        survivorship, so it is flagged from that sample onward.
        """
        lost = np.asarray(self.live_fraction, dtype=float) < 1.0
        return ~np.maximum.accumulate(lost)


def _exact_curve(name: str, result: EnsembleResult) -> np.ndarray | None:
    params = oracle.match_schedule(
        result.params, result.config.N_a0, result.config.N_b0)
    if params is None or name not in oracle.EXACT_OBSERVABLES:
        return None
    return np.asarray(oracle.exact_series(name, result.times, params), dtype=float)


def observable_series(result: EnsembleResult, method=None,
                      name: str = "X_a") -> ObservableSeries:
    """Estimate one observable at every sample time of an ensemble run.

    Per-batch estimates are formed from each batch's live moment means and
    combined with :func:`batch_mean_se`.  Dead batches are dropped; for the
    correlation coefficient, batches whose variance product is not positive
    are dropped too (with a warning).  A warning is also emitted when the
    imaginary residual of the estimate is statistically inconsistent with
    zero, which signals a sampling or dynamics inconsistency.
    """
    if name not in OBSERVABLE_NAMES:
        raise ValueError(f"unknown observable {name!r}")
    spec = result.method if method is None else (
        method if isinstance(method, MethodSpec) else MethodSpec.of(method))

    n_samples = result.n_samples
    n_batches = result.n_batches
    mean = np.full(n_samples, np.nan)
    stderr = np.full(n_samples, np.nan)
    used = np.zeros(n_samples, dtype=int)
    dropped_alive = 0
    worst_im = 0.0

    for s in range(n_samples):
        by_batch = result.batch_moment_means(s)
        vals = np.empty(n_batches, dtype=complex)
        for b in range(n_batches):
            moments = {key: complex(col[b]) for key, col in by_batch.items()}
            vals[b] = observable_estimate_complex(name, moments, spec)
        finite = np.isfinite(vals.real) & np.isfinite(vals.imag)
        alive = result.live_counts[s] > 0
        dropped_alive += int(np.count_nonzero(alive & ~finite))
        used[s] = int(np.count_nonzero(finite))
        if used[s] == 0:
            continue
        re = vals.real[finite]
        im = vals.imag[finite]
        mean[s] = re.mean()
        if used[s] >= 2:
            stderr[s] = re.std(ddof=1) / math.sqrt(used[s])
            se_im = im.std(ddof=1) / math.sqrt(used[s])
            excess = abs(im.mean()) - max(10.0 * se_im,
                                          1e-8 * (1.0 + abs(mean[s])))
            worst_im = max(worst_im, excess)

    if dropped_alive:
        warnings.warn(
            f"{name}: dropped {dropped_alive} live batch estimates with no "
            "finite value (non-positive variance product)", stacklevel=2)
    if worst_im > 0:
        warnings.warn(
            f"{name}: imaginary residual inconsistent with zero "
            f"(excess {worst_im:.3g}); check sampling or dynamics",
            stacklevel=2)

    return ObservableSeries(
        name=name,
        method=spec.method,
        times=np.asarray(result.times, dtype=float),
        mean=mean,
        stderr=stderr,
        live_fraction=np.asarray(result.live_fraction, dtype=float),
        n_batches_used=used,
        exact=_exact_curve(name, result),
    )


def correlation_series(result: EnsembleResult, method=None) -> ObservableSeries:
    """The number-quadrature correlation coefficient against time."""
    return observable_series(result, method, "C_Na_Yb")


def detect_blowup(series: ObservableSeries, window: int = 20,
                  factor: float = 10.0,
                  live_threshold: float = 0.999) -> float | None:
    """Earliest sampling-breakdown time of a series, or None.

    Breakdown is flagged at the earlier of (a) the live fraction dipping
    below ``live_threshold`` and (b) the standard error exceeding
    ``factor`` times the median standard error over the preceding
    ``window`` samples.  The error rule needs at least three finite
    preceding values and a positive median, so a quiet start can never
    trigger it.
    """
    candidates = []
    lf = np.asarray(series.live_fraction, dtype=float)
    below = np.nonzero(lf < live_threshold)[0]
    if below.size:
        candidates.append(float(series.times[below[0]]))

    se = np.asarray(series.stderr, dtype=float)
    for i in range(len(se)):
        prev = se[max(0, i - window):i]
        prev = prev[np.isfinite(prev)]
        if prev.size < 3:
            continue
        med = float(np.median(prev))
        if med <= 0.0:
            continue
        if np.isfinite(se[i]) and se[i] > factor * med:
            candidates.append(float(series.times[i]))
            break

    return min(candidates) if candidates else None
