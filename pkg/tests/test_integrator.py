"""Step plans, the single-step map, and ensemble integration."""
import math

import numpy as np
import pytest

from phasesde import (
    CoherentInit,
    CouplingSchedule,
    EnsembleConfig,
    MethodSpec,
    PhasePoint,
    SystemParams,
    build_step_plan,
    run_ensemble,
    simulate_trajectory,
)
from phasesde.core import MONOMIALS
from phasesde.integrator import TrajectoryState, euler_maruyama_step, make_stream

APA = MONOMIALS.index("alpha_plus_alpha")


def kerr(g=1.0, omega_a=0.0, omega_b=0.0, chi_a=1.0, chi_b=1.0):
    return SystemParams(omega_a, omega_b, chi_a, chi_b,
                        CouplingSchedule.constant(g))


def config(**kw):
    base = dict(n_trajectories=64, dt=1e-3, t_final=0.05, N_a0=1.0,
                N_b0=0.25, n_batches=8, sample_interval=10, master_seed=5)
    base.update(kw)
    return EnsembleConfig(**base)


# ---------------------------------------------------------------------------
# step plan
# ---------------------------------------------------------------------------


def test_plan_uniform_grid():
    plan = build_step_plan(config(dt=1e-4, t_final=0.02, sample_interval=20),
                           kerr())
    assert plan.n_substeps == 200
    np.testing.assert_allclose(plan.sub_dt, 1e-4)
    np.testing.assert_allclose(
        plan.sample_times, np.linspace(0.0, 0.02, 11), atol=1e-15)
    assert plan.record_after.sum() == 10  # t=0 is not a recorded substep


def test_plan_splits_at_off_grid_breakpoint():
    params = SystemParams(0.0, -100.0, 1.0, 1.0,
                          CouplingSchedule.switched(1.0, 0.1))
    cfg = config(dt=3e-5, t_final=0.2, sample_interval=1000)
    plan = build_step_plan(cfg, params)
    n_nominal = round(0.2 / 3e-5)
    assert plan.n_substeps == n_nominal + 1
    # one auxiliary substep ends exactly on the switch time
    assert np.any(plan.sub_t_end == 0.1)
    # the coupling value honors the schedule on both sides
    before = plan.sub_g[plan.sub_t_end <= 0.1 + 1e-12]
    after = plan.sub_g[plan.sub_t_end > 0.1 + 1e-12]
    assert np.all(before == 1.0) and np.all(after == 0.0)
    # auxiliary substeps do not disturb the sampling cadence
    expected_samples = [0.0, 0.03, 0.06, 0.09, 0.12, 0.15, 0.18, 0.2]
    np.testing.assert_allclose(plan.sample_times, expected_samples, atol=1e-12)


def test_plan_breakpoint_on_grid_needs_no_split():
    params = SystemParams(0.0, 0.0, 1.0, 1.0, CouplingSchedule.switched(1.0, 0.01))
    plan = build_step_plan(config(dt=1e-4, t_final=0.02, sample_interval=100),
                           params)
    assert plan.n_substeps == 200
    assert np.any(np.abs(plan.sub_t_end - 0.01) < 1e-12)


def test_plan_keeps_partial_tail_step():
    plan = build_step_plan(config(dt=1e-4, t_final=2.5e-4, sample_interval=1),
                           kerr())
    assert plan.n_substeps == 3
    assert plan.sub_dt[-1] == pytest.approx(5e-5)
    assert plan.sample_times[-1] == pytest.approx(2.5e-4)
    assert plan.record_after[-1]


def test_plan_zero_duration_is_a_single_sample():
    plan = build_step_plan(config(t_final=0.0), kerr())
    assert plan.n_substeps == 0
    np.testing.assert_array_equal(plan.sample_times, [0.0])


# ---------------------------------------------------------------------------
# single Euler-Maruyama step (reference map)
# ---------------------------------------------------------------------------


def test_euler_tracks_a_linear_oscillator():
    params = SystemParams(1.0, 0.0, 0.0, 0.0, CouplingSchedule.constant(0.0))
    method = MethodSpec.of("positive_p")
    dt = 1e-3
    state = TrajectoryState(point=PhasePoint(1.0, 1.0, 0.0, 0.0))
    gen = make_stream(0, 0)
    for _ in range(100):
        state = euler_maruyama_step(state, params, 0.0, dt, gen, method=method)
    assert state.live
    assert state.t == pytest.approx(0.1)
    # first-order accuracy: global error O(dt) on this horizon
    assert state.point.alpha == pytest.approx(np.exp(-0.1j), abs=1e-3)


def test_euler_marks_blowup_and_freezes():
    params = kerr()
    method = MethodSpec.of("hybrid")
    state = TrajectoryState(point=PhasePoint(2.0, 2.0, 0.5, 0.5))
    gen = make_stream(0, 1)
    dead = euler_maruyama_step(state, params, 1.0, 1e-3, gen, method=method,
                               blowup_threshold=1.0)
    assert not dead.live
    assert dead.blowup_time == pytest.approx(1e-3)
    frozen = euler_maruyama_step(dead, params, 1.0, 1e-3, gen, method=method)
    assert frozen is dead


# ---------------------------------------------------------------------------
# ensemble runs
# ---------------------------------------------------------------------------


def test_noise_free_hybrid_conserves_occupation():
    rec = simulate_trajectory(
        CoherentInit.from_occupations(4.0, 0.25), "hybrid", kerr(),
        config(n_trajectories=1, n_batches=1, t_final=0.5), noise_free=True)
    apa = rec.monomials[:, APA].real
    assert np.all(rec.live)
    np.testing.assert_allclose(apa, apa[0], rtol=1e-12)
    assert np.abs(rec.monomials[:, APA].imag).max() < 1e-12


def test_noise_free_hybrid_equals_further_truncated():
    """Without noise both b occupations stay real, so the flows coincide."""
    init = CoherentInit.from_occupations(2.0, 1.0)
    kw = dict(trajectory_index=3, noise_free=True)
    rec_full = simulate_trajectory(init, "hybrid", kerr(),
                                   config(t_final=0.2), **kw)
    rec_trunc = simulate_trajectory(init, "hybrid_truncated", kerr(),
                                    config(t_final=0.2), **kw)
    np.testing.assert_allclose(rec_full.monomials, rec_trunc.monomials,
                               rtol=1e-12, atol=1e-13)


def test_ensemble_is_deterministic_across_worker_counts():
    cfg = config(n_trajectories=64)
    one = run_ensemble("hybrid", kerr(), cfg, n_workers=1)
    four = run_ensemble("hybrid", kerr(), cfg, n_workers=4)
    assert np.array_equal(one.sums, four.sums)
    assert np.array_equal(one.live_counts, four.live_counts)
    assert np.array_equal(one.blowup_times, four.blowup_times,
                          equal_nan=True)


def test_ensemble_depends_on_master_seed():
    a = run_ensemble("hybrid", kerr(), config(master_seed=5))
    b = run_ensemble("hybrid", kerr(), config(master_seed=6))
    assert not np.array_equal(a.sums, b.sums)


def test_single_trajectory_reproduces_its_ensemble_contribution():
    cfg = config(n_trajectories=1, n_batches=1, master_seed=9)
    ens = run_ensemble("positive_p", kerr(), cfg)
    rec = simulate_trajectory(CoherentInit.from_occupations(1.0, 0.25),
                              "positive_p", kerr(), cfg, trajectory_index=0)
    assert np.array_equal(ens.sums[:, 0, :], rec.monomials)


def test_ensemble_sums_match_brute_force_accumulation():
    """Bit-identical to summing single-trajectory runs batch by batch."""
    cfg = config(n_trajectories=100, n_batches=10, master_seed=12)
    ens = run_ensemble("hybrid", kerr(), cfg)
    init = CoherentInit.from_occupations(cfg.N_a0, cfg.N_b0)
    manual = np.zeros_like(ens.sums)
    counts = np.zeros_like(ens.live_counts)
    for i in range(cfg.n_trajectories):
        rec = simulate_trajectory(init, "hybrid", kerr(), cfg,
                                  trajectory_index=i)
        batch = i % cfg.n_batches
        live = rec.live
        manual[live, batch, :] += rec.monomials[live]
        counts[live, batch] += 1
    assert np.array_equal(counts, ens.live_counts)
    assert np.array_equal(manual, ens.sums)


def test_halving_dt_moves_means_much_less_than_noise():
    """Split-step weak error at dt=2e-4 is far below the sampling error."""
    from phasesde.stats import observable_series

    base = dict(n_trajectories=2000, t_final=0.1, N_a0=100.0, N_b0=0.01,
                n_batches=10, sample_interval=500, master_seed=31)
    coarse = run_ensemble("hybrid", kerr(), EnsembleConfig(dt=2e-4, **base))
    fine = run_ensemble("hybrid", kerr(), EnsembleConfig(dt=1e-4, **base))
    s_coarse = observable_series(coarse, name="X_a")
    s_fine = observable_series(fine, name="X_a")
    diff = abs(s_coarse.mean[-1] - s_fine.mean[-1])
    assert diff < s_coarse.stderr[-1]


def test_live_fraction_is_monotone_under_breakdown():
    cfg = EnsembleConfig(n_trajectories=200, dt=1e-4, t_final=0.15,
                         N_a0=100.0, N_b0=0.01, n_batches=10,
                         sample_interval=50, master_seed=14)
    res = run_ensemble("positive_p", kerr(), cfg)
    assert res.live_fraction[0] == 1.0
    assert np.all(np.diff(res.live_fraction) <= 0.0)
    # this regime destroys positive-P trajectories quickly
    assert res.live_fraction[-1] < 1.0
    dead = np.isfinite(res.blowup_times)
    assert dead.any()
    assert np.all(res.blowup_times[dead] <= 0.15 + 1e-12)


def test_wigner_flow_conserves_sampled_occupation():
    rec = simulate_trajectory(
        CoherentInit.from_occupations(4.0, 0.25), "wigner", kerr(),
        config(n_trajectories=1, n_batches=1, dt=1e-3, t_final=2.0,
               sample_interval=100))
    apa = rec.monomials[:, APA].real
    assert np.abs(apa / apa[0] - 1.0).max() < 1e-9


def test_tiny_threshold_kills_everything_but_the_initial_sample():
    cfg = config(blowup_threshold=1e-3)
    res = run_ensemble("hybrid", kerr(), cfg)
    assert res.live_fraction[0] == 1.0
    assert res.live_fraction[-1] == 0.0
    assert np.all(np.isfinite(res.blowup_times))
    means = res.ensemble_moment_means(res.n_samples - 1)
    assert all(np.isnan(np.real(v)) for v in means.values())


def test_gauge_drift_recording():
    cfg = config(n_trajectories=16, n_batches=4)
    plain = run_ensemble("hybrid", kerr(), cfg)
    assert plain.gauge_drift is None
    tracked = run_ensemble("hybrid", kerr(), cfg, record_gauge_drift=True)
    assert tracked.gauge_drift is not None
    assert tracked.gauge_drift.shape == (16,)
    assert np.all(tracked.gauge_drift >= 0.0)
    assert np.all(np.isfinite(tracked.gauge_drift))


def test_unknown_stepper_and_method_are_rejected():
    with pytest.raises(ValueError):
        run_ensemble("hybrid", kerr(), config(), stepper="rk4")
    with pytest.raises(ValueError):
        run_ensemble("heun", kerr(), config())


def test_euler_stepper_through_the_ensemble_api():
    from phasesde.stats import observable_series

    params = SystemParams(1.0, 0.0, 0.0, 0.0, CouplingSchedule.constant(0.0))
    cfg = EnsembleConfig(n_trajectories=100, dt=1e-4, t_final=0.1, N_a0=1.0,
                         N_b0=0.0, n_batches=10, sample_interval=200,
                         master_seed=21)
    res = run_ensemble("positive_p", params, cfg, stepper="euler")
    series = observable_series(res, name="X_a")
    assert series.mean[-1] == pytest.approx(math.cos(0.1), abs=1e-3)


def test_switched_coupling_tracks_the_exact_curve():
    from phasesde.stats import observable_series

    params = SystemParams(0.0, 0.0, 1.0, 1.0, CouplingSchedule.switched(1.0, 0.1))
    cfg = EnsembleConfig(n_trajectories=800, dt=1e-3, t_final=0.2, N_a0=1.0,
                         N_b0=0.25, n_batches=10, sample_interval=20,
                         master_seed=33)
    res = run_ensemble("hybrid", params, cfg)
    series = observable_series(res, name="X_b")
    assert series.exact is not None
    err = np.abs(series.mean - series.exact)
    assert np.all(err <= np.maximum(4.0 * series.stderr, 0.01))
