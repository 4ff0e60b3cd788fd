"""Mixed-representation run on the strongly coupled pair, checked live.

The a mode carries 100 photons of Kerr dynamics and is sampled in the
symmetric (Wigner) cloud; the almost-empty b mode keeps the exact
positive-P treatment.  With 1000 trajectories both quadratures should sit
on the closed-form curves to within a few batch standard errors -- the
table prints the pull (error over stderr) so you can see that directly.
"""
import numpy as np

from phasesde import CouplingSchedule, EnsembleConfig, SystemParams, run_ensemble
from phasesde.stats import observable_series


def pull_table(series):
    # the b mode starts delta-sampled, so its t=0 stderr is pure roundoff;
    # don't divide a one-ulp error by it
    rows = []
    for i, t in enumerate(series.times):
        err = series.mean[i] - series.exact[i]
        pull = err / series.stderr[i] if series.stderr[i] > 1e-12 else 0.0
        rows.append((t, series.mean[i], series.exact[i], series.stderr[i], pull))
    return rows


def main():
    params = SystemParams(0.0, 0.0, 1.0, 1.0, CouplingSchedule.constant(1.0))
    config = EnsembleConfig(
        n_trajectories=1000, dt=1e-4, t_final=0.2, N_a0=100.0, N_b0=0.01,
        n_batches=10, sample_interval=40, master_seed=2)
    result = run_ensemble("hybrid", params, config)

    for name in ("X_a", "X_b"):
        series = observable_series(result, name=name)
        print(f"\n{name}: mixed method, 1000 trajectories")
        print(f"{'t':>6s} {'mean':>10s} {'exact':>10s} {'stderr':>9s} {'pull':>6s}")
        for t, mean, exact, se, pull in pull_table(series):
            print(f"{t:6.3f} {mean:10.5f} {exact:10.5f} {se:9.5f} {pull:6.2f}")

    print("\nall trajectories alive:", bool(np.all(result.live_fraction == 1.0)))


if __name__ == "__main__":
    main()
