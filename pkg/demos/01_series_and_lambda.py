# %% [markdown]
# Windowed series, phi and psi, and the series lambda.
# Run with `python demos/01_series_and_lambda.py`.

# %%
from fractions import Fraction

from pyphitau import GaloisRing, PadicField, PrimeConfig, USeries, lambda_series

cfg = PrimeConfig()          # p = 3, r = 4, E = u - 3
Z = GaloisRing(cfg)
K = PadicField(cfg)

# %%
# A Laurent series over W(F_3)/3^4, known on the u-window [-2, 6].
x = USeries.from_ints(Z, {-2: 1, 0: 5, 1: 2, 4: -1}, lo=-2, hi=6)
print("x          =", x)
print("phi(x)     =", x.phi())
print("psi(phi x) =", x.phi().psi())
print("psi(u)     =", USeries.monomial(Z, 1).psi())

# %%
# lambda = prod phi^n(E / E(0)), to u^12
L = lambda_series(cfg, 12)
for i in range(13):
    a = L.coeff(i)
    if not a.is_exact_zero():
        print(f"u^{i:<2d}  {a}   v_3 = {a.val}")

# %%
# The functional equation lambda = (E/E(0)) phi(lambda), checked on the window
e = USeries.from_ints(K, {0: 1, 1: Fraction(-1, 3)})
print("lambda == (E/E0) phi(lambda):", L.agrees((e * L.phi()).truncate(12)))
