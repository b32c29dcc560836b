# %% [markdown]
# # Sweeps, metrics and histograms
#
# ``run_sweep`` instantiates each (vehicle count, repetition) point from a child
# seed, runs every solver on it and averages the metrics.  The same config
# always writes the same CSV apart from the runtime columns.

# %%
import tempfile
from pathlib import Path

from v2xplace import RunConfig, builtin_scenario, delay_histogram, instantiate, run_sweep, solve_greedy, utilization

out = Path(tempfile.mkdtemp())
result = run_sweep(RunConfig(scenario="SMALL", repetitions=5, output_dir=out))
for row in result.summary:
    print(
        f"{row['vehicle_count']:4d} {row['solver']:6s}"
        f" agg {row['aggregate_avg_delay_ms_mean']:8.2f}"
        f" CAM {row['avg_delay_CAM_ms_mean']:6.2f}"
        f" MEDIA {row['avg_delay_MEDIA_ms_mean']:6.2f}"
        f" cpu {row['util_cpu_mean']:.3f}"
        f" {row['runtime_ms_mean']:8.3f} ms"
    )
print(sorted(p.name for p in out.iterdir()))

# %% [markdown]
# CAM stays at the RSUs while MEDIA spills to the core as vehicles grow.  The
# delay distribution of a single greedy placement on the large highway:

# %%
problem = instantiate(builtin_scenario("LARGE", 300, seed=1))
placement, _ = solve_greedy(problem)
for type_id in ("CAM", "MEDIA"):
    hist = delay_histogram(problem, placement, type_id, bin_width_ms=10)
    print(type_id)
    for lo, hi, density in hist.rows():
        print(f"  [{lo:5.0f}, {hi:5.0f}) {'#' * int(round(density * 500))}")
print(utilization(problem, placement))
