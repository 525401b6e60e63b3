# %% [markdown]
# # Simulating increments with and without a break
#
# The jump part has tail integral U(z) = sqrt(beta / (pi z)).  A break at
# theta0 switches beta from one value to another.  We simulate both cases and
# look at how often increments exceed a few thresholds.

# %%
from __future__ import annotations

import numpy as np

from levybreak import JumpModel, ProcessSpec, SamplerConfig, simulate_path

k_n, dninv = 100, 225
n, dn = k_n * dninv, 1 / dninv

null = ProcessSpec(jump_pre=JumpModel.beta_family(1.0))
alt = ProcessSpec(
    jump_pre=JumpModel.beta_family(1.0), jump_post=JumpModel.beta_family(2.5), theta0=0.5
)

x0 = simulate_path(null, n, dn, SamplerConfig(seed=1))
x1 = simulate_path(alt, n, dn, SamplerConfig(seed=1))
print(f"n = {x0.n}, k_n = {x0.k_n:g}")

# %% [markdown]
# Exceedance counts per half.  Under the null both halves agree up to noise;
# after the break the second half has about sqrt(2.5) times as many.

# %%
for z in (0.1, 0.5, 1.0):
    for name, x in (("null", x0), ("break", x1)):
        first, second = x.values[: n // 2], x.values[n // 2 :]
        print(f"z={z:4.1f} {name:6s} {np.sum(first >= z):5d} {np.sum(second >= z):5d}")

# %% [markdown]
# Adding drift and Brownian noise.  Thresholds should then scale with
# sqrt(delta_n) so that the Gaussian part does not dominate the counts.

# %%
noisy = ProcessSpec(b=1.0, sigma=1.0, jump_pre=JumpModel.beta_family(1.0))
x2 = simulate_path(noisy, n, dn, SamplerConfig(seed=2))
z = 4 * np.sqrt(dn)
print(f"exceedances of 4 sqrt(delta_n) = {z:.3f}: {np.sum(x2.values >= z)}")

# %% [markdown]
# The exact stable sampler draws each increment in one shot and is handy as a
# reference for the truncated compound Poisson sampler.

# %%
exact = simulate_path(null, n, dn, SamplerConfig(method="exact-stable", seed=3))
print("exact-stable exceedances of 0.5:", int(np.sum(exact.values >= 0.5)))
