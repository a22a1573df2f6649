# %% [markdown]
# # Block chains for larger forbidden differences
#
# For diff:k the chains step through blocks of k elements instead of single
# ones. The probability that a block chain meets a fixed set can be computed
# exactly on a tiny universe and compared with sampling.

# %%
from fractions import Fraction
from itertools import permutations
from math import factorial

from itertools import combinations

from diffree import block_chains, block_hit_estimate, make_family
from diffree.chains import PermSample, removable_ksets

n, k = 6, 2
B = make_family(n, [[1, 2, 3, 4]])
target = B.sets[0]
tails = [(1 << (a - 1)) | (1 << (b - 1)) for a, b in combinations(range(3, n + 1), 2)]
hits = 0
for perm in permutations(range(1, n + 1)):
    sigma = PermSample(perm, 0, 0)
    for S in tails:
        hits += int((block_chains(sigma, S, k) == target).sum())
print("exact density:", Fraction(hits, factorial(n) * len(tails)))

est = block_hit_estimate(B, k, samples=20_000, seed=0)
print(f"sampled: {est.mean:.4f} +/- {est.std_err:.4f}")

# %% [markdown]
# Inside a diff:k-free family, the k-subsets of a set D whose removal lands
# back in the family form an intersecting family. That caps their number at
# C(|D|-1, k-1) once |D| >= 2k.

# %%
from diffree import a_star_k

f = a_star_k(11, 2)
best = max(range(1 << 11), key=lambda D: (len(removable_ksets(D, f, 2)) if D.bit_count() >= 4 else -1))
print(f"|D|={best.bit_count()}: {len(removable_ksets(best, f, 2))} removable pairs <= {best.bit_count() - 1}")
