# %% [markdown]
# # Kriging on molecular fingerprints
#
# Fit an ordinary-kriging GP with the Tanimoto kernel to the Photoswitch
# fingerprints and look at predictions, excursion probabilities and the
# effect of one extra observation.

# %%
from pathlib import Path

import numpy as np

from crpsdesign.experiment import compute_threshold, load_dataset
from crpsdesign.gp import classify, excursion_prob, fit_hyperparams, update
from crpsdesign.kernels import KernelSpec

data = load_dataset(Path(__file__).resolve().parent.parent / "data" / "photoswitch.csv")
print(data.n, "molecules,", data.d, "bits")

# %%
rng = np.random.default_rng(0)
perm = rng.permutation(data.n)
train, test = perm[:80], perm[80:]
model = fit_hyperparams(data.X[train], data.z[train], KernelSpec("tanimoto"))
print(f"signal variance {model.kernel.variance:.1f}, noise variance {model.noise_var:.3g}, mean {model.beta:.1f}")

m, v = model.predict(data.X[test])
print(f"held-out RMSE {np.sqrt(np.mean((m - data.z[test]) ** 2)):.2f}")

# %% [markdown]
# Excursion set: molecules whose wavelength exceeds the 0.8-quantile.

# %%
t = compute_threshold(data, 0.8)
p = excursion_prob(model, data.X[test], t)
hat = classify(model, data.X[test], t)
truth = data.z[test] >= t
print(f"t = {t:.1f}; {hat.sum()} predicted in the set, {truth.sum()} actually in it, "
      f"{(hat & truth).sum()} both")
print("most uncertain classifications:", np.sort(np.abs(p - 0.5))[:5].round(3))

# %% [markdown]
# Observing one more molecule shrinks the variance everywhere it is
# correlated with the new point.

# %%
j = test[int(np.argmax(v))]
after = update(model, data.X[j], data.z[j])
v2 = after.predict(data.X[test])[1]
print(f"mean variance {v.mean():.1f} -> {v2.mean():.1f}; largest drop {np.max(v - v2):.1f}")
