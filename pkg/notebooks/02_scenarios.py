# %% [markdown]
# # Seeded highway scenarios
#
# The two builtin scenarios follow the simulation table: a 2 km highway with
# 10 nodes for 20..100 vehicles and an 8 km highway with 30 nodes for 140..300.
# One service instance of each type is deployed per 20 vehicles.

# %%
from collections import Counter

from v2xplace import builtin_scenario, instantiate
from v2xplace.scenario import builtin_vehicle_counts

for which in ("SMALL", "LARGE"):
    for n in builtin_vehicle_counts(which):
        problem = instantiate(builtin_scenario(which, n, seed=1))
        tiers = Counter(node.tier.value for node in problem.nodes)
        print(which, n, dict(tiers), "instances per type:", len(problem.instances_of("CAM")))

# %% [markdown]
# Delays are drawn uniformly per tier (RSU 1..10 ms, eNB 20..40 ms, core
# 60..130 ms).  Each vehicle row has its own counter-based stream, so adding
# vehicles keeps the rows of the ones already there.

# %%
small = instantiate(builtin_scenario("SMALL", 20, seed=42)).delay_matrix.delays_ms
big = instantiate(builtin_scenario("SMALL", 40, seed=42)).delay_matrix.delays_ms
print("first 20 rows unchanged:", (small == big[:20]).all())
print("per-node mean delay:", small.mean(axis=0).round(1))

# %% [markdown]
# Custom scenarios override any field of a builtin one.

# %%
spec = builtin_scenario("SMALL", 60, seed=3).replace(rsu_nodes=8)
print(Counter(node.tier.value for node in instantiate(spec).nodes))
