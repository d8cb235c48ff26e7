# %% [markdown]
# The naive two-operator complex is too big: on the trivial F_3-module the
# classes (a, 1) are cocycles for it, yet their tau-component does not lie
# where gamma acts as delta, and no coboundary produces them.

# %%
from pyphitau import PrimeConfig, USeries
from pyphitau.complexes import build, coboundary_solve, naive_vs_restricted
from pyphitau.phitau import ModElement, apply_phi, in_tau0, make_trivial

cfg = PrimeConfig().with_precision(1)
M = make_trivial(1, cfg)
R = M.ring
naive, full = build("naive", M), build("phi_tau", M)

# %%
classes = []
for a in range(3):
    y = ModElement(M, [USeries.constant(R, R.from_int(a))])
    z = ModElement(M, [USeries.one(R)]).base_change(0)
    classes.append((a, (y, z)))

for row in naive_vs_restricted(naive, full, classes)["rows"]:
    print(row)

# %%
one = ModElement(M, [USeries.one(R)])
print("1 in ker(phi - 1):     ", apply_phi(one).agrees(one))
print("1 in D_tau,0 at level 0:", in_tau0(one.base_change(0)))
for a, cl in classes:
    print(f"coboundary solver on ({a}, 1):", coboundary_solve(full, cl).ok)
