# %% [markdown]
# # Checking families and reading violations
#
# Families are stored as integer bitmasks (element i is bit i-1). The checker
# returns every offending pair together with the rule it broke. Rules can be
# written in a small text form and combined with commas.

# %%
from diffree import check_family, make_family, parse_spec
from diffree.family import lym_sum, truncate_to_band

f = make_family(6, [[1, 2, 3], [1, 2, 4], [4, 5, 6], [1, 2, 3, 4]])
rules = parse_spec("diff:1,meet:0")
for v in check_family(f, rules).violations:
    print(v)

# %% [markdown]
# Restricting to a band of sizes removes the cross-layer conflicts, but the
# swap between {1,2,3} and {1,2,4} survives inside layer 3.

# %%
g, removed = truncate_to_band(f, (3, 3))
print(len(g), "kept,", removed, "removed; LYM sum", lym_sum(g))
print(check_family(g, parse_spec("diff:1")).ok)
