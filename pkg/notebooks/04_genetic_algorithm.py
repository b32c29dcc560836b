# %% [markdown]
# # Genetic-algorithm baseline
#
# Chromosomes are node indices per instance; fitness adds a large penalty per
# violated constraint.  Initialization is uniformly random, so on crowded
# problems the GA may never see a feasible individual.

# %%
from v2xplace import GaConfig, Infeasible, builtin_scenario, instantiate, solve_exact, solve_ga

problem = instantiate(builtin_scenario("SMALL", 60, seed=2))
optimum = solve_exact(problem)[0].objective_ms

placement, stats = solve_ga(problem, GaConfig(seed=7))
print("optimum", round(optimum, 3), "GA", round(placement.objective_ms, 3), "found in generation", stats.generation_found)

# %% [markdown]
# With elitism the best penalized fitness never rises.  Values above 1e5 mean
# the best individual still violated something.

# %%
for gen in (0, 1, 5, 20, 50, 100, 200):
    print(gen, round(stats.best_fitness[gen], 3))

# %% [markdown]
# At 100 vehicles edge capacity is nearly exhausted and some seeds fail.

# %%
crowded = instantiate(builtin_scenario("SMALL", 100, seed=2))
found = 0
for seed in range(10):
    try:
        solve_ga(crowded, GaConfig(seed=seed))
        found += 1
    except Infeasible:
        pass
print(f"feasible in {found}/10 seeds")
