# %% [markdown]
# # Building a placement problem by hand
#
# Three nodes (core, eNB, RSU), three service types, two vehicles.  We write the
# delay matrix ourselves so every number below can be checked on paper.

# %%
import numpy as np

from v2xplace import (
    ComputeNode,
    DelayMatrix,
    Placement,
    PlacementProblem,
    ResourceVector,
    ServiceInstance,
    UniqueServiceType,
    check_feasibility,
    evaluate_objective,
)

unit = ResourceVector(1, 1, 1)
types = [
    UniqueServiceType("MEDIA", "MEDIA", 150, unit),
    UniqueServiceType("DENM", "DENM", 50, unit),
    UniqueServiceType("CAM", "CAM", 20, unit),
]
instances = [ServiceInstance(1, "MEDIA"), ServiceInstance(2, "DENM"), ServiceInstance(3, "CAM")]
nodes = [ComputeNode(1, "CORE", unit), ComputeNode(2, "ENB", unit), ComputeNode(3, "RSU", unit)]
delays = DelayMatrix(np.array([[100.0, 30.0, 5.0], [100.0, 30.0, 5.0]]))  # vehicles x nodes
problem = PlacementProblem(types, instances, nodes, 2, delays)

# %% [markdown]
# The objective sums, over instances, the mean delay from all vehicles to the
# hosting node.  Sending MEDIA to the core, DENM to the eNB and CAM to the RSU
# costs 100 + 30 + 5.

# %%
good = Placement({1: 1, 2: 2, 3: 3})
print("objective:", evaluate_objective(problem, good))
print("violations:", list(check_feasibility(problem, good)))

# %% [markdown]
# Swapping CAM and DENM puts CAM 30 ms away, over its 20 ms threshold.  The
# report names the constraint kind and the offending instance.

# %%
bad = Placement({1: 1, 2: 3, 3: 2})
for v in check_feasibility(problem, bad):
    print(v)

# %% [markdown]
# Problems round-trip through JSON, which is what the command line reads.

# %%
text = problem.to_json()
print(PlacementProblem.from_json(text) == problem, len(text), "bytes")
