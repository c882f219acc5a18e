# %% [markdown]
# # Threshold-weighted CRPS for Gaussian forecasts
#
# The CRPS compares a forecast CDF with the observed value over the whole
# real line. Weighting it focuses the comparison on the region we care
# about: above a threshold `t` (indicator weight) or around it (Gaussian
# weight of width `sigma_gamma`).

# %%
import numpy as np

from crpsdesign.scoring import (
    WeightSpec,
    crps_gaussian,
    expected_twcrps_gaussian_weight,
    expected_twcrps_indicator,
    twcrps_gaussian_weight,
    twcrps_indicator,
    twcrps_numeric_oracle,
)

# %% [markdown]
# The closed forms agree with direct numerical integration of the weighted
# squared CDF difference.

# %%
mu, var, y, t = 0.5, 1.7, 1.9, 1.0
for name, closed, w in [
    ("CRPS", crps_gaussian(mu, var, y), WeightSpec("unweighted")),
    ("indicator", twcrps_indicator(mu, var, y, t), WeightSpec("indicator", t)),
    ("gaussian", twcrps_gaussian_weight(mu, var, y, t, 0.8), WeightSpec("gaussian", t, 0.8)),
]:
    print(f"{name:10s} closed form {closed:.10f}  quadrature {twcrps_numeric_oracle(mu, var, y, w):.10f}")

# %% [markdown]
# The indicator weight is asymmetric. Forecasting high when the truth is low
# matters less than forecasting low when the truth lies above the threshold.
# The Gaussian weight treats both mistakes alike.

# %%
print("indicator:", twcrps_indicator(3.0, 4.0, -3.0, 0.0), "vs", twcrps_indicator(-3.0, 4.0, 3.0, 0.0))
print("gaussian: ", twcrps_gaussian_weight(3.0, 4.0, -3.0, 0.0, 1.5), "vs",
      twcrps_gaussian_weight(-3.0, 4.0, 3.0, 0.0, 1.5))

# %% [markdown]
# Expected scores under the forecast itself are what the pointwise
# acquisition criteria maximize. The indicator version keeps growing with
# the mean, the Gaussian version peaks at the threshold.

# %%
grid = np.linspace(-4, 4, 9)
print(" mean   E[tw_ind]   E[tw_gauss]")
for m, a, b in zip(grid, expected_twcrps_indicator(grid, 1.0, 0.0),
                   expected_twcrps_gaussian_weight(grid, 1.0, 0.0, 1.0)):
    print(f"{m:5.1f}  {a:9.5f}  {b:10.5f}")
