# %% [markdown]
# # Building families with no difference of size one
#
# A family on [n] is diff:1-free when no two members A, B satisfy |A \ B| = 1.
# The residue construction keeps the middle layer sets whose element sum falls
# in one residue class mod n. Two sets of equal size differing by one swap
# have sums that differ by 1..n-1, so they can never share a class.

# %%
from math import comb

from diffree import ForbiddenDifference, a_star, a_star_k, check_family, middle_layers
from diffree.constructions import a_star_with_residue, residue_class_sizes
from diffree.family import pigeonhole_floor

f, r = a_star_with_residue(12)
print(f"n=12: picked residue {r[0]}, {len(f)} sets, middle layer has {comb(12, 6)}")
print("valid:", check_family(f, ForbiddenDifference(1)).ok)

# %% [markdown]
# The classes split the middle layer almost evenly, which is where the
# pigeonhole floor C(n, n//2)/n comes from.

# %%
sizes = residue_class_sizes(12, 1)
print(sorted(c for c in sizes.values()))
for n in (8, 12, 16, 20, 24):
    print(n, len(a_star(n)), ">=", pigeonhole_floor(n, 1))

# %% [markdown]
# For prime n the same idea works with the first k power sums, which rules out
# differences of size k.

# %%
for k in (1, 2, 3):
    g = a_star_k(13, k)
    print(f"k={k}: {len(g)} sets, diff:{k}-free = {check_family(g, ForbiddenDifference(k)).ok}")

# %% [markdown]
# Forbidding a ratio p/q between |A \ B| and |B \ A| is satisfied by a run of
# q - p consecutive layers around the middle.

# %%
from diffree import ForbiddenRatio

h = middle_layers(9, 1, 3)
print(sorted({m.bit_count() for m in h.sets}), len(h), check_family(h, ForbiddenRatio(1, 3)).ok)
