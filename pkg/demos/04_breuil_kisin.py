# %% [markdown]
# From a Breuil-Kisin module to its tau-action: the xi-section, the
# connection matrix and the reconstructed tau series for A = E(u).

# %%
from pyphitau import PrimeConfig, USeries, lambda_series
from pyphitau.breuilkisin import (
    BKMod, n_nabla_matrix, s_nabla_certificate, solve_xi, tau_series,
)

cfg = PrimeConfig()
M = BKMod.from_terms([[{0: -3, 1: 1}]], cfg)       # phi(e) = E(u) e

# %%
xi = solve_xi(M, 12)
print("Xi                  =", xi.Xi[0][0])
print("Xi equals lambda:    ", xi.Xi[0][0].agrees(lambda_series(cfg, 12)))
print("xi-defect vanishes:  ", xi.defect_ok)

# %%
N = n_nabla_matrix(M, xi)
print("N matrix            =", N[0][0])
print("S_nabla certificate: ", s_nabla_certificate(M, N)["ok"])

# %%
(T,) = tau_series(M, N, [USeries.one(M.K)], 8, 0, 8, 12)
print("tau(e), first eta-degrees:")
for k in sorted(T.c)[:3]:
    print(f"  eta^{k}:", T.c[k])
