"""Ensemble integration with counter-based seeding and blow-up handling.

Each trajectory owns a Philox stream keyed by (master_seed, trajectory
index) and consumes it in a fixed documented order: first the initial
sampling draws (mode a, then mode b), then four noise draws per substep.
Normals always come from the inverse CDF of the stream's uniforms, so the
consumption count never depends on platform or on the values drawn.
Trajectories are processed in fixed-size chunks and chunk partials are
merged in index order, which makes results bit-identical for a given
config no matter how many workers run the chunks.

Two steppers are available:

* ``"split_step"`` (default): applies the noise factors at the pre-step
  point, then advances the phase rotation exp(-i F dt) exactly, dividing
  the plus variables by the same rotation factor.  The rotation therefore
  conserves alpha_plus*alpha and beta_plus*beta to machine precision; the
  additionally truncated method further applies its interface noise as an
  exact exponential pair so alpha_plus*alpha stays real as well.  This is
  the production path: the plain Euler map is violently unstable on the
  stiff Kerr rotation at the occupations of interest.
* ``"euler"``: the literal Euler-Maruyama map point + A dt + B xi sqrt(dt),
  kept for unit-level checks of the drift and diffusion evaluation.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import dynamics
from .core import (
    MONOMIALS,
    EnsembleConfig,
    EnsembleResult,
    MethodSpec,
    PhasePoint,
    SystemParams,
    validate_config,
)
from .representations import (
    CoherentInit,
    draw_standard_normals,
    sample_positive_p_coherent,
    sample_wigner_coherent,
)

__all__ = [
    "TrajectoryState",
    "TrajectoryRecord",
    "StepPlan",
    "build_step_plan",
    "euler_maruyama_step",
    "simulate_trajectory",
    "run_ensemble",
    "STEPPERS",
]

STEPPERS = ("split_step", "euler")

# Trajectories per work unit.  Fixed (never derived from worker count) so
# the partial-sum grouping, and hence the output bytes, are reproducible.
CHUNK_SIZE = 2048

# Substeps of noise drawn per trajectory at a time.
NOISE_BLOCK = 256


@dataclass
class TrajectoryState:
    """A single trajectory between steps."""

    point: PhasePoint
    live: bool = True
    rng_stream: tuple = (0, 0)
    t: float = 0.0
    blowup_time: float | None = None


def make_stream(master_seed: int, trajectory_index: int) -> np.random.Generator:
    """The dedicated counter-based stream of one trajectory."""
    key = np.array([master_seed, trajectory_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _noise_count(method: MethodSpec) -> int:
    return 0 if method.method == "wigner" else 4


def euler_maruyama_step(state: TrajectoryState, params: SystemParams, g: float,
                        dt: float, rng_stream, *, method: MethodSpec,
                        blowup_threshold: float = math.inf) -> TrajectoryState:
    """One literal Euler-Maruyama step: point + A dt + B xi sqrt(dt).

    Draws the method's noise vector from ``rng_stream`` (four standard
    normals, or none for the noiseless method).  A component exceeding the
    threshold in magnitude, or going non-finite, marks the trajectory dead
    with the event time recorded; dead trajectories pass through frozen.
    """
    if not state.live:
        return state
    p = state.point
    name = method.method
    if name in ("hybrid", "hybrid_truncated"):
        drift = dynamics.hybrid_drift(
            p, params, g, further_truncation=(name == "hybrid_truncated"))
        noise = dynamics.hybrid_noise_factor(p, params, g)
    elif name == "positive_p":
        drift, noise = dynamics.positive_p_two_mode(p, params, g)
    else:
        drift = dynamics.wigner_truncated(p, params, g)
        noise = None

    vec = p.as_array() + np.asarray(drift, dtype=complex) * dt
    if noise is not None:
        xi = draw_standard_normals(rng_stream, 4)
        vec = vec + (noise @ xi) * math.sqrt(dt)

    new_point = PhasePoint(*vec)
    t_new = state.t + dt
    dead = (not new_point.is_finite()) or bool(np.max(np.abs(vec)) > blowup_threshold)
    return TrajectoryState(
        point=new_point,
        live=not dead,
        rng_stream=state.rng_stream,
        t=t_new,
        blowup_time=t_new if dead else None,
    )


# --------------------------------------------------------------------------
# time grid
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StepPlan:
    """Substep schedule for one run.

    Nominal steps sit on the grid k*dt; a coupling breakpoint strictly
    inside a nominal step splits it into shortened auxiliary substeps that
    land on the breakpoint exactly.  Auxiliary substeps do not advance the
    sampling cadence: samples are recorded after nominal step k whenever k
    is a multiple of sample_interval, plus the final time.
    """

    sub_dt: np.ndarray
    sub_g: np.ndarray
    sub_t_end: np.ndarray
    record_after: np.ndarray
    sample_times: np.ndarray

    @property
    def n_substeps(self) -> int:
        return len(self.sub_dt)

    @property
    def n_samples(self) -> int:
        return len(self.sample_times)


def build_step_plan(config: EnsembleConfig, params: SystemParams) -> StepPlan:
    dt = config.dt
    t_final = config.t_final
    tol = 1e-9 * dt
    n_nominal = int(math.floor(t_final / dt + 1e-9))
    remainder = t_final - n_nominal * dt
    has_tail = remainder > tol
    breaks = [
        t for t in params.coupling.breakpoints() if tol < t < t_final - tol
    ]

    sub_dt, sub_g, sub_t_end, record_after = [], [], [], []
    sample_times = [0.0]
    schedule = params.coupling

    def extend(t0, t1):
        inner = [t for t in breaks if t0 + tol < t < t1 - tol]
        pts = [t0, *inner, t1]
        for lo, hi in zip(pts, pts[1:]):
            sub_dt.append(hi - lo)
            sub_g.append(schedule.g_at(0.5 * (lo + hi)))
            sub_t_end.append(hi)
            record_after.append(False)

    for k in range(n_nominal):
        extend(k * dt, (k + 1) * dt)
        is_last = (k + 1 == n_nominal) and not has_tail
        if (k + 1) % config.sample_interval == 0 or is_last:
            record_after[-1] = True
            sample_times.append((k + 1) * dt)
    if has_tail:
        extend(n_nominal * dt, t_final)
        record_after[-1] = True
        sample_times.append(t_final)

    return StepPlan(
        sub_dt=np.asarray(sub_dt, dtype=float),
        sub_g=np.asarray(sub_g, dtype=float),
        sub_t_end=np.asarray(sub_t_end, dtype=float),
        record_after=np.asarray(record_after, dtype=bool),
        sample_times=np.asarray(sample_times, dtype=float),
    )


def _substep_coefficients(method: MethodSpec, params: SystemParams, plan: StepPlan):
    """Per-substep noise scalars, precomputed once and shared by chunks."""
    name = method.method
    if name in ("hybrid", "hybrid_truncated"):
        q = 0.5 * np.sqrt(-1j * plan.sub_g + 0j)
        s = complex(np.sqrt(2j * params.chi_b + 0j))
        return {"q": q, "s": s}
    if name == "positive_p":
        factors = {}
        F = np.empty((plan.n_substeps, 2, 2), dtype=complex)
        for j, g in enumerate(plan.sub_g):
            if g not in factors:
                factors[g] = dynamics.positive_p_mode_factor(
                    params.chi_a, params.chi_b, g)
            F[j] = factors[g]
        return {"F": F}
    return {}


# --------------------------------------------------------------------------
# chunk engine
# --------------------------------------------------------------------------


def _initial_arrays(indices, method: MethodSpec, init: CoherentInit,
                    master_seed: int):
    """Initial phase-space arrays plus the per-trajectory streams.

    Consumption order within each stream: mode a draws first, then mode b;
    delta-sampled modes consume nothing.
    """
    m = len(indices)
    a = np.empty(m, dtype=complex)
    ap = np.empty(m, dtype=complex)
    b = np.empty(m, dtype=complex)
    bp = np.empty(m, dtype=complex)
    gens = [make_stream(master_seed, int(i)) for i in indices]
    for j, gen in enumerate(gens):
        if method.r_a == 2:
            a[j], ap[j] = sample_wigner_coherent(init.gamma_a, gen)
        else:
            a[j], ap[j] = sample_positive_p_coherent(init.gamma_a)
        if method.r_b == 2:
            b[j], bp[j] = sample_wigner_coherent(init.gamma_b, gen)
        else:
            b[j], bp[j] = sample_positive_p_coherent(init.gamma_b)
    return a, ap, b, bp, gens


def _simulate_chunk(indices, method: MethodSpec, params: SystemParams,
                    config: EnsembleConfig, init: CoherentInit, plan: StepPlan,
                    coeffs, stepper: str, noise_free: bool, record_gauge: bool,
                    threshold: float):
    """Integrate one chunk of trajectories; returns per-chunk partials."""
    name = method.method
    n_batches = config.n_batches
    m = len(indices)
    batch_idx = np.asarray(indices) % n_batches
    n_samples = plan.n_samples

    sums = np.zeros((n_samples, n_batches, len(MONOMIALS)), dtype=complex)
    live_counts = np.zeros((n_samples, n_batches), dtype=np.int64)
    blow_t = np.full(m, np.nan)
    gauge_max = np.zeros(m)

    a, ap, b, bp, gens = _initial_arrays(indices, method, init,
                                         config.master_seed)
    live = np.ones(m, dtype=bool)
    apa0 = ap * a
    apa0_scale = np.where(np.abs(apa0) > 0, np.abs(apa0), 1.0)

    def record(sample_index):
        apa = ap * a
        vals = np.empty((m, len(MONOMIALS)), dtype=complex)
        vals[:, 0] = a
        vals[:, 1] = ap
        vals[:, 2] = b
        vals[:, 3] = bp
        vals[:, 4] = apa
        vals[:, 5] = bp * b
        vals[:, 6] = apa * apa
        vals[:, 7] = b * b
        vals[:, 8] = bp * bp
        vals[:, 9] = apa * b
        vals[:, 10] = apa * bp
        idx = batch_idx[live]
        np.add.at(sums[sample_index], idx, vals[live])
        np.add.at(live_counts[sample_index], idx, 1)

    record(0)
    sample_index = 1
    needs_noise = _noise_count(method) > 0 and not noise_free
    q_arr = coeffs.get("q")
    s_coef = coeffs.get("s")
    F_arr = coeffs.get("F")

    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        for block_start in range(0, plan.n_substeps, NOISE_BLOCK):
            block_len = min(NOISE_BLOCK, plan.n_substeps - block_start)
            if needs_noise:
                xi = np.empty((m, block_len, 4))
                for j, gen in enumerate(gens):
                    xi[j] = draw_standard_normals(
                        gen, block_len * 4).reshape(block_len, 4)
            for s_local in range(block_len):
                j = block_start + s_local
                dt_s = plan.sub_dt[j]
                g = plan.sub_g[j]
                sdt = math.sqrt(dt_s)
                x = xi[:, s_local, :] if needs_noise else None

                if name in ("hybrid", "hybrid_truncated"):
                    apa = ap * a
                    bpb = bp * b
                    if name == "hybrid_truncated":
                        bpb = np.real(bpb)
                    f_a, f_b = dynamics.hybrid_frequencies(apa, bpb, params, g)
                    if needs_noise:
                        q = q_arr[j]
                        e3 = x[:, 2] + 1j * x[:, 3]
                        em = x[:, 2] - 1j * x[:, 3]
                        mult_b = (1j * s_coef * x[:, 0] + q * em) * sdt
                        mult_bp = (s_coef * x[:, 1] + q * em) * sdt
                    if stepper == "split_step":
                        if needs_noise:
                            if name == "hybrid_truncated":
                                # Exact exponential pair: keeps alpha_plus*alpha
                                # real under the interface noise.
                                ee = np.exp(q * e3 * sdt)
                                a_mid = a * ee
                                ap_mid = ap / ee
                            else:
                                a_mid = a * (1.0 + q * e3 * sdt)
                                ap_mid = ap * (1.0 - q * e3 * sdt)
                            b_mid = b * (1.0 + mult_b)
                            bp_mid = bp * (1.0 + mult_bp)
                        else:
                            a_mid, ap_mid, b_mid, bp_mid = a, ap, b, bp
                        rot_a = np.exp(-1j * f_a * dt_s)
                        rot_b = np.exp(-1j * f_b * dt_s)
                        a = a_mid * rot_a
                        ap = ap_mid / rot_a
                        b = b_mid * rot_b
                        bp = bp_mid / rot_b
                    else:
                        da = -1j * f_a * a * dt_s
                        dap = +1j * f_a * ap * dt_s
                        db = -1j * f_b * b * dt_s
                        dbp = +1j * f_b * bp * dt_s
                        if needs_noise:
                            da = da + a * q * e3 * sdt
                            dap = dap - ap * q * e3 * sdt
                            db = db + b * mult_b
                            dbp = dbp + bp * mult_bp
                        a, ap, b, bp = a + da, ap + dap, b + db, bp + dbp
                elif name == "positive_p":
                    apa = ap * a
                    bpb = bp * b
                    f_a, f_b = dynamics.positive_p_frequencies(
                        apa, bpb, params, g)
                    if needs_noise:
                        F = F_arr[j]
                        mult_a = (F[0, 0] * x[:, 0] + F[0, 1] * x[:, 1]) * sdt
                        mult_b = (F[1, 0] * x[:, 0] + F[1, 1] * x[:, 1]) * sdt
                        mult_ap = 1j * (F[0, 0] * x[:, 2] + F[0, 1] * x[:, 3]) * sdt
                        mult_bp = 1j * (F[1, 0] * x[:, 2] + F[1, 1] * x[:, 3]) * sdt
                    if stepper == "split_step":
                        if needs_noise:
                            a_mid = a * (1.0 + mult_a)
                            ap_mid = ap * (1.0 + mult_ap)
                            b_mid = b * (1.0 + mult_b)
                            bp_mid = bp * (1.0 + mult_bp)
                        else:
                            a_mid, ap_mid, b_mid, bp_mid = a, ap, b, bp
                        rot_a = np.exp(-1j * f_a * dt_s)
                        rot_b = np.exp(-1j * f_b * dt_s)
                        a = a_mid * rot_a
                        ap = ap_mid / rot_a
                        b = b_mid * rot_b
                        bp = bp_mid / rot_b
                    else:
                        da = -1j * f_a * a * dt_s
                        dap = +1j * f_a * ap * dt_s
                        db = -1j * f_b * b * dt_s
                        dbp = +1j * f_b * bp * dt_s
                        if needs_noise:
                            da = da + a * mult_a
                            dap = dap + ap * mult_ap
                            db = db + b * mult_b
                            dbp = dbp + bp * mult_bp
                        a, ap, b, bp = a + da, ap + dap, b + db, bp + dbp
                else:  # wigner: drift only
                    na = np.real(ap * a)
                    nb = np.real(bp * b)
                    f_a, f_b = dynamics.wigner_frequencies(na, nb, params, g)
                    if stepper == "split_step":
                        a = a * np.exp(-1j * f_a * dt_s)
                        b = b * np.exp(-1j * f_b * dt_s)
                    else:
                        a = a + (-1j * f_a * a) * dt_s
                        b = b + (-1j * f_b * b) * dt_s
                    ap = np.conj(a)
                    bp = np.conj(b)

                bad = ~(
                    np.isfinite(a.real) & np.isfinite(a.imag)
                    & np.isfinite(ap.real) & np.isfinite(ap.imag)
                    & np.isfinite(b.real) & np.isfinite(b.imag)
                    & np.isfinite(bp.real) & np.isfinite(bp.imag)
                )
                bad |= (
                    (np.abs(a) > threshold) | (np.abs(ap) > threshold)
                    | (np.abs(b) > threshold) | (np.abs(bp) > threshold)
                )
                newly = bad & live
                if newly.any():
                    blow_t[newly] = plan.sub_t_end[j]
                    live &= ~bad
                    # Zero is a fixed point of every update rule here, so
                    # dead lanes stay put without special-casing the loop.
                    a[newly] = ap[newly] = b[newly] = bp[newly] = 0.0

                if record_gauge:
                    drift = np.abs(ap * a - apa0) / apa0_scale
                    gauge_max = np.where(live & (drift > gauge_max),
                                         drift, gauge_max)

                if plan.record_after[j]:
                    record(sample_index)
                    sample_index += 1

    return {
        "sums": sums,
        "live_counts": live_counts,
        "blowup_times": blow_t,
        "gauge_max": gauge_max,
    }


# --------------------------------------------------------------------------
# public entry points
# --------------------------------------------------------------------------


def _resolve_method(method) -> MethodSpec:
    if isinstance(method, MethodSpec):
        return method
    return MethodSpec.of(method)


def run_ensemble(method, params: SystemParams, config: EnsembleConfig, *,
                 stepper: str = "split_step", n_workers: int | None = None,
                 noise_free: bool = False,
                 record_gauge_drift: bool = False) -> EnsembleResult:
    """Integrate the full ensemble and return batch-structured moment sums.

    Trajectory i uses the stream keyed (master_seed, i) and belongs to
    batch i mod n_batches.  Chunk partials are reduced in fixed index
    order, so the result is bit-identical for a given config regardless
    of ``n_workers``.  ``noise_free`` zeroes all noise terms (debug aid);
    ``record_gauge_drift`` attaches the per-trajectory maximum relative
    drift of alpha_plus*alpha over the run.
    """
    method = _resolve_method(method)
    if stepper not in STEPPERS:
        raise ValueError(f"unknown stepper {stepper!r}; expected one of {STEPPERS}")
    validate_config(config, method, params)

    init = CoherentInit.from_occupations(config.N_a0, config.N_b0)
    plan = build_step_plan(config, params)
    coeffs = _substep_coefficients(method, params, plan)
    threshold = config.blowup_threshold * max(1.0, math.sqrt(config.N_a0))

    n = config.n_trajectories
    bounds = [(lo, min(lo + CHUNK_SIZE, n)) for lo in range(0, n, CHUNK_SIZE)]

    def job(bound):
        lo, hi = bound
        return _simulate_chunk(
            np.arange(lo, hi), method, params, config, init, plan, coeffs,
            stepper, noise_free, record_gauge_drift, threshold)

    if n_workers is None:
        n_workers = min(4, os.cpu_count() or 1, len(bounds))
    if n_workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            partials = list(pool.map(job, bounds))
    else:
        partials = [job(bd) for bd in bounds]

    # Ordered reduction over chunks: the grouping is fixed by CHUNK_SIZE,
    # never by scheduling, so merging is reproducible.
    sums = np.sum(np.stack([p["sums"] for p in partials]), axis=0)
    live_counts = np.sum(np.stack([p["live_counts"] for p in partials]), axis=0)
    blowup_times = np.concatenate([p["blowup_times"] for p in partials])
    gauge = np.concatenate([p["gauge_max"] for p in partials])

    batch_sizes = np.bincount(
        np.arange(n) % config.n_batches, minlength=config.n_batches)
    live_fraction = live_counts.sum(axis=1) / float(n)

    return EnsembleResult(
        times=plan.sample_times,
        sums=sums,
        live_counts=live_counts,
        batch_sizes=batch_sizes,
        live_fraction=live_fraction,
        blowup_times=blowup_times,
        method=method,
        params=params,
        config=config,
        gauge_drift=gauge if record_gauge_drift else None,
    )


@dataclass
class TrajectoryRecord:
    """Sampled monomials of a single trajectory."""

    times: np.ndarray
    monomials: np.ndarray  # (n_samples, len(MONOMIALS)); NaN after blow-up
    live: np.ndarray
    blowup_time: float | None
    monomial_names: tuple = MONOMIALS


def simulate_trajectory(init: CoherentInit, method, params: SystemParams,
                        config: EnsembleConfig, *, trajectory_index: int = 0,
                        stepper: str = "split_step",
                        noise_free: bool = False) -> TrajectoryRecord:
    """Integrate one trajectory identified by its ensemble index.

    Runs the same engine as ``run_ensemble`` on a singleton chunk, so the
    sampled monomials agree bit-for-bit with that trajectory's ensemble
    contribution.
    """
    method = _resolve_method(method)
    if stepper not in STEPPERS:
        raise ValueError(f"unknown stepper {stepper!r}; expected one of {STEPPERS}")
    plan = build_step_plan(config, params)
    coeffs = _substep_coefficients(method, params, plan)
    threshold = config.blowup_threshold * max(1.0, math.sqrt(config.N_a0))
    part = _simulate_chunk(
        np.array([trajectory_index]), method, params, config, init, plan,
        coeffs, stepper, noise_free, False, threshold)

    batch = trajectory_index % config.n_batches
    counts = part["live_counts"][:, batch]
    vals = part["sums"][:, batch, :]
    vals = np.where(counts[:, None] > 0, vals, np.nan + 0j)
    blow = part["blowup_times"][0]
    return TrajectoryRecord(
        times=plan.sample_times,
        monomials=vals,
        live=counts > 0,
        blowup_time=None if math.isnan(blow) else float(blow),
    )
