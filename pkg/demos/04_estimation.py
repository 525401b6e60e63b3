# %% [markdown]
# # Locating the break
#
# The argmax of |T_n(theta, z0)| over theta estimates the break fraction.
# Taking the maximum over a grid of thresholds as well uses information from
# every jump size.

# %%
from __future__ import annotations

import numpy as np

from levybreak import (
    JumpModel,
    ProcessSpec,
    SamplerConfig,
    brownian_grid,
    estimate_changepoint,
    simulate_path,
)

k_n, dninv = 250, 90
dn = 1 / dninv
spec = ProcessSpec(
    b=1.0,
    sigma=1.0,
    jump_pre=JumpModel.beta_family(1.0),
    jump_post=JumpModel.beta_family(2.5),
    theta0=0.75,
)

# %%
fixed, over_grid = [], []
for seed in range(50):
    x = simulate_path(spec, k_n * dninv, dn, SamplerConfig(seed=seed))
    fixed.append(estimate_changepoint(x, 3.5 * np.sqrt(dn)).theta_hat)
    over_grid.append(estimate_changepoint(x, brownian_grid(dn)).theta_hat)

print(f"fixed threshold: median {np.median(fixed):.3f}, mean abs error {np.mean(np.abs(np.subtract(fixed, 0.75))):.3f}")
print(f"over the grid:   median {np.median(over_grid):.3f}, mean abs error {np.mean(np.abs(np.subtract(over_grid, 0.75))):.3f}")
