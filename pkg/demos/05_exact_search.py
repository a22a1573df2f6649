# %% [markdown]
# # Exact maxima by branch and bound
#
# Every rule defines a conflict graph on the subsets of [n]; a valid family is
# an independent set. For small n the maximum is found exactly, and for n <= 4
# it is cross-checked against a scan of all 2^(2^n) subfamilies.

# %%
from math import comb

from diffree import (
    ForbiddenDifference,
    ForbiddenIntersection,
    ForbiddenRatio,
    a_star,
    max_family,
)

for n in range(1, 9):
    r = max_family(n, ForbiddenDifference(1))
    print(f"n={n}: f={r.optimum:3d} proven={r.proven_optimal} a_star={len(a_star(n))}")

# %% [markdown]
# Two classical results come out of the same solver: the largest antichain
# (ratio 0/1) and the largest intersecting family of k-sets (meet:0 on one
# layer).

# %%
print([max_family(n, ForbiddenRatio(0, 1)).optimum for n in range(1, 8)])
print([comb(n, n // 2) for n in range(1, 8)])
print(max_family(8, ForbiddenIntersection(0), (3, 3)).optimum, comb(7, 2))

# %% [markdown]
# Past n = 8 the search rarely closes, so a node budget and a warm start keep
# it useful: the result is the best family found and says whether it is
# proven.

# %%
r = max_family(10, ForbiddenDifference(1), budget=20_000, initial=a_star(10).sets)
print(r.optimum, r.proven_optimal, r.nodes_explored)
