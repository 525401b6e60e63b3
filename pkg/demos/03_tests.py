# %% [markdown]
# # Running the three change-point tests
#
# kscp1 compares V_n(z0) with a Kolmogorov quantile.  kscp2 and cp use the
# multiplier bootstrap for their critical values; cp takes the supremum over
# a whole threshold grid.

# %%
from __future__ import annotations

from levybreak import (
    BootstrapConfig,
    JumpModel,
    ProcessSpec,
    SamplerConfig,
    pure_jump_grid,
    run_tests,
    simulate_path,
)

k_n, dninv = 100, 225
base = JumpModel.beta_family(1.0)
designs = {
    "null": ProcessSpec(jump_pre=base),
    "break": ProcessSpec(jump_pre=base, jump_post=JumpModel.beta_family(2.5), theta0=0.5),
}
cfg = BootstrapConfig(B=250, seed=11)

# %%
for name, spec in designs.items():
    x = simulate_path(spec, k_n * dninv, 1 / dninv, SamplerConfig(seed=5))
    for out in run_tests(x, ["kscp1", "kscp2", "cp"], [0.25], pure_jump_grid(), 0.05, cfg):
        print(
            f"{name:5s} {out.method:5s} stat={out.statistic:6.3f} "
            f"crit={out.critical_value:6.3f} reject={out.reject}"
        )

# %% [markdown]
# Outcomes serialise to JSON for logging; the cp outcome also records its grid.

# %%
first = run_tests(x, ["kscp2"], [0.25], None, 0.05, cfg)[0]
print(first.to_json())
