# %% [markdown]
# # Which kernel for fingerprints?
#
# Held-out RMSE and CRPS for the Tanimoto, exponential and Gaussian kernels
# at three training fractions, averaged over the same random splits.
# Five splits here to keep it quick; the acceptance suite uses thirty.

# %%
from pathlib import Path

from crpsdesign.experiment import kernel_comparison, load_dataset

data = load_dataset(Path(__file__).resolve().parent.parent / "data" / "photoswitch.csv")
rows = kernel_comparison(data, [0.1, 0.2, 0.3], splits=5, seed=0)

# %%
print(f"{'kernel':12s} {'train':>5s} {'RMSE':>7s} {'CRPS':>7s}")
for r in sorted(rows, key=lambda r: (r["fraction"], r["rmse"])):
    print(f"{r['kernel']:12s} {r['fraction']:5.0%} {r['rmse']:7.2f} {r['crps']:7.2f}")
