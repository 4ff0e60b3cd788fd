"""Batch statistics, series estimation, and breakdown detection."""
import math

import numpy as np
import pytest

from phasesde import (
    CouplingSchedule,
    EnsembleConfig,
    EnsembleResult,
    MethodSpec,
    SystemParams,
    run_ensemble,
)
from phasesde.core import MONOMIALS
from phasesde.stats import (
    ObservableSeries,
    batch_mean_se,
    correlation_series,
    detect_blowup,
    observable_series,
)


def test_batch_mean_se_basics():
    mean, se = batch_mean_se([1.0, 2.0, 3.0, 4.0])
    assert mean == pytest.approx(2.5)
    assert se == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2.0)
    # dead batches (NaN) are dropped, not averaged
    mean2, se2 = batch_mean_se([1.0, 2.0, 3.0, 4.0, np.nan])
    assert (mean2, se2) == (mean, se)
    with pytest.raises(ValueError):
        batch_mean_se([1.0, np.nan])


def test_stderr_reliable_latches_at_first_loss():
    series = ObservableSeries(
        name="X_a", method="hybrid",
        times=np.arange(4.0), mean=np.zeros(4), stderr=np.ones(4),
        live_fraction=np.array([1.0, 1.0, 0.99, 1.0]),
        n_batches_used=np.full(4, 10))
    np.testing.assert_array_equal(series.stderr_reliable,
                                  [True, True, False, False])


# ---------------------------------------------------------------------------
# synthetic ensembles
# ---------------------------------------------------------------------------


def moment_row(alpha, alpha_plus, beta, beta_plus):
    apa = alpha_plus * alpha
    return np.array([
        alpha, alpha_plus, beta, beta_plus,
        apa, beta_plus * beta, apa ** 2,
        beta ** 2, beta_plus ** 2, apa * beta, apa * beta_plus,
    ], dtype=complex)


def synthetic_result(rows, method="positive_p"):
    """A one-sample ensemble with each row standing in for one batch."""
    n_batches = len(rows)
    sums = np.array([rows])
    live = np.ones((1, n_batches), dtype=np.int64)
    cfg = EnsembleConfig(n_trajectories=n_batches, dt=1e-3, t_final=0.0,
                         N_a0=4.0, N_b0=0.25, n_batches=n_batches)
    params = SystemParams(0.0, 0.0, 1.0, 1.0, CouplingSchedule.constant(1.0))
    return EnsembleResult(
        times=np.array([0.0]),
        sums=sums,
        live_counts=live,
        batch_sizes=np.ones(n_batches, dtype=np.int64),
        live_fraction=np.array([1.0]),
        blowup_times=np.full(n_batches, np.nan),
        method=MethodSpec.of(method),
        params=params,
        config=cfg,
    )


def test_correlation_drops_batches_with_nonpositive_variance():
    healthy_a = moment_row(2.0, 2.0, 0.5, 0.5)
    healthy_b = moment_row(2.1, 2.1, 0.4, 0.4)
    poisoned = moment_row(2.0, 2.0, 2.0, -2.0)  # Y_b variance estimate -3.75
    result = synthetic_result([healthy_a, healthy_b, poisoned])
    with pytest.warns(UserWarning, match="non-positive variance product"):
        series = correlation_series(result)
    assert series.n_batches_used[0] == 2
    assert np.isfinite(series.mean[0])


def test_imaginary_residual_warning():
    # a systematic imaginary part in X_a across batches is flagged
    rows = [moment_row(2.0j, 2.0j, 0.5, 0.5),
            moment_row(2.1j, 2.1j, 0.5, 0.5),
            moment_row(1.9j, 1.9j, 0.5, 0.5)]
    result = synthetic_result(rows)
    with pytest.warns(UserWarning, match="imaginary residual"):
        observable_series(result, name="X_a")


def test_correlation_series_is_the_named_observable():
    cfg = EnsembleConfig(n_trajectories=100, dt=1e-3, t_final=0.3,
                         N_a0=100.0, N_b0=0.01, n_batches=10,
                         sample_interval=50, master_seed=61)
    params = SystemParams(0.0, -100.0, 1.0, 1.0,
                          CouplingSchedule.switched(1.0, 0.1))
    res = run_ensemble("hybrid", params, cfg)
    a = correlation_series(res)
    b = observable_series(res, name="C_Na_Yb")
    np.testing.assert_array_equal(a.mean, b.mean)
    np.testing.assert_array_equal(a.stderr, b.stderr)
    assert a.exact is not None  # switched-off coupling has closed forms


def test_exact_curve_absent_for_general_schedules():
    schedule = CouplingSchedule(((0.05, 1.0), (0.1, 0.5), (math.inf, 0.0)))
    params = SystemParams(0.0, 0.0, 1.0, 1.0, schedule)
    cfg = EnsembleConfig(n_trajectories=20, dt=1e-3, t_final=0.15,
                         N_a0=1.0, N_b0=0.25, n_batches=4, sample_interval=50,
                         master_seed=8)
    res = run_ensemble("hybrid", params, cfg)
    assert observable_series(res, name="X_a").exact is None


def test_unknown_observable_name_is_rejected():
    result = synthetic_result([moment_row(1.0, 1.0, 0.5, 0.5),
                               moment_row(1.0, 1.0, 0.5, 0.5)])
    with pytest.raises(ValueError):
        observable_series(result, name="Q_a")


# ---------------------------------------------------------------------------
# real runs: error scaling and physics
# ---------------------------------------------------------------------------


def test_stderr_scales_with_ensemble_size():
    """Doubling the ensemble shrinks batch errors by about sqrt(2).

    The batch-spread estimate of the standard error has ~5% relative sd
    at 200 batches, so the median ratio over samples sits in a generous
    band around sqrt(2).
    """
    base = dict(dt=2e-4, t_final=0.1, N_a0=100.0, N_b0=0.01, n_batches=200,
                sample_interval=25, master_seed=42)
    params = SystemParams(0.0, 0.0, 1.0, 1.0, CouplingSchedule.constant(1.0))
    small = run_ensemble("hybrid", params,
                         EnsembleConfig(n_trajectories=1000, **base))
    large = run_ensemble("hybrid", params,
                         EnsembleConfig(n_trajectories=2000, **base))
    se_small = observable_series(small, name="X_a").stderr
    se_large = observable_series(large, name="X_a").stderr
    keep = np.isfinite(se_small) & np.isfinite(se_large) & (se_large > 0)
    ratio = np.median(se_small[keep] / se_large[keep])
    assert 1.25 <= ratio <= 1.6


def test_number_estimate_matches_initial_occupation():
    cfg = EnsembleConfig(n_trajectories=400, dt=1e-4, t_final=0.05,
                         N_a0=100.0, N_b0=0.01, n_batches=10,
                         sample_interval=100, master_seed=71)
    params = SystemParams(0.0, 0.0, 1.0, 1.0, CouplingSchedule.constant(1.0))
    res = run_ensemble("hybrid", params, cfg)
    series = observable_series(res, name="N_a")
    assert np.all(series.live_fraction == 1.0)
    assert np.all(np.abs(series.mean - 100.0) <= 4.0 * series.stderr)


# ---------------------------------------------------------------------------
# breakdown detection
# ---------------------------------------------------------------------------


def flat_series(n=100, stderr=None, live=None):
    times = np.linspace(0.0, 1.0, n)
    return ObservableSeries(
        name="X_a", method="positive_p", times=times,
        mean=np.zeros(n),
        stderr=np.full(n, 0.01) if stderr is None else stderr,
        live_fraction=np.ones(n) if live is None else live,
        n_batches_used=np.full(n, 10))


def test_detector_stays_quiet_on_flat_noise():
    assert detect_blowup(flat_series()) is None


def test_detector_fires_on_error_spike():
    se = np.full(100, 0.01)
    se[60:] = 1.0
    series = flat_series(stderr=se)
    assert detect_blowup(series) == pytest.approx(series.times[60])


def test_detector_fires_on_live_fraction_dip():
    live = np.ones(100)
    live[30:] = 0.99
    series = flat_series(live=live)
    assert detect_blowup(series) == pytest.approx(series.times[30])


def test_detector_reports_the_earlier_signal():
    se = np.full(100, 0.01)
    se[60:] = 1.0
    live = np.ones(100)
    live[30:] = 0.99
    series = flat_series(stderr=se, live=live)
    assert detect_blowup(series) == pytest.approx(series.times[30])


def test_detector_ignores_a_noisy_start():
    # huge stderr at the very first samples cannot trigger the ratio rule
    se = np.full(100, 0.01)
    se[0] = 5.0
    assert detect_blowup(flat_series(stderr=se)) is None


def test_hybrid_survives_past_the_positive_p_horizon():
    """In the strong-Kerr regime the mixed method holds for a couple of
    Kerr times while pure positive-P statistics break almost immediately."""
    params = SystemParams(0.0, 0.0, 1.0, 1.0, CouplingSchedule.constant(1.0))
    pp_cfg = EnsembleConfig(n_trajectories=200, dt=1e-4, t_final=0.3,
                            N_a0=100.0, N_b0=0.01, n_batches=10,
                            sample_interval=50, master_seed=52)
    pp_time = detect_blowup(observable_series(
        run_ensemble("positive_p", params, pp_cfg), name="X_a"))
    assert pp_time is not None and pp_time <= 0.1

    hy_cfg = EnsembleConfig(n_trajectories=100, dt=1e-4, t_final=3.2,
                            N_a0=100.0, N_b0=0.01, n_batches=10,
                            sample_interval=200, master_seed=53)
    hy_time = detect_blowup(observable_series(
        run_ensemble("hybrid", params, hy_cfg), name="X_a"))
    assert hy_time is None or 2.0 <= hy_time <= 3.2
