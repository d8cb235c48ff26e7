# %% [markdown]
# Solving c*phi - 1 and the tau-derivation over the Robba ring, with the
# number of p-digits lost along the way.

# %%
import random

from pyphitau import PrimeConfig, USeries
from pyphitau.robba import (
    allowed_loss, c_phi_minus_one, lost_digits, partial_tau, random_robba,
    solve_c_phi_minus_one, solve_image_bounded_below, solve_partial_tau,
)

cfg = PrimeConfig()
rng = random.Random(3)

# %%
h = random_robba(cfg, rng, 0, 12)
y = solve_c_phi_minus_one(h)
print("h               =", h)
print("(c phi - 1)(y) == h:", c_phi_minus_one(y).agrees(h), " digits lost:",
      lost_digits(h, c_phi_minus_one(y)))

# %%
f = random_robba(cfg, rng, -12, 12)
y, a0 = solve_partial_tau(f)
print("constant term left over:", a0)
print("d_tau(y) == f - a0:", partial_tau(y).agrees(f - USeries.constant(f.ring, a0)))

# %%
D = solve_image_bounded_below(f)
print("decomposition residual vanishes:", D.residual().agrees(USeries.zero(D.g.ring)))
print("digits lost:", D.loss, " budget:", allowed_loss(cfg.p, 25))
