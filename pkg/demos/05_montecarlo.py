# %% [markdown]
# # Monte Carlo level and power
#
# ExperimentConfig describes one design.  run_experiment simulates every
# replicate from its own seed, runs the requested tests and returns a
# rejection table.  The sizes here are small so the demo runs in seconds;
# full_scale() switches to 1000 replications and B = 250.

# %%
from __future__ import annotations

from levybreak import ExperimentConfig, run_experiment
from levybreak.montecarlo import grid_preset

k_n, dninv = 50, 450
common = dict(
    k_n=k_n,
    delta_n_inv=dninv,
    z0_list=(0.1, 1.0),
    z_grid=grid_preset("coarse-pure-jump", 1 / dninv),
    B=100,
    replications=40,
    master_seed=2024,
)

null = run_experiment(ExperimentConfig(**common))
power = run_experiment(ExperimentConfig(beta_post=3.0, theta0=0.5, **common))

# %%
print("level")
print(null.to_csv())
print("power, beta 1 -> 3 at theta0 = 0.5")
print(power.to_csv())
