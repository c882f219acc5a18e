"""Build ``photoswitch.csv`` from the public Photoswitch dataset.

This is an offline preprocessing step and the only place RDKit is used.
The source table is ``Photoswitch.csv`` as distributed with the GAUCHE
package (``gauche/datasets/property_prediction/Photoswitch.csv``), which
mirrors https://github.com/Ryan-Rhys/The-Photoswitch-Dataset.

Usage::

    python data/make_photoswitch.py path/to/Photoswitch.csv data/photoswitch.csv

Molecules without a measured E-isomer pi-pi* transition wavelength are
dropped, leaving 392 rows. Fingerprints are Morgan, radius 3, 2048 bits.
"""
import csv
import sys

from rdkit import Chem
from rdkit.Chem import rdFingerprintGenerator

RESPONSE = "E isomer pi-pi* wavelength in nm"
NBITS = 2048
RADIUS = 3


def main(src, dst):
    gen = rdFingerprintGenerator.GetMorganGenerator(radius=RADIUS, fpSize=NBITS)
    rows = []
    with open(src, newline="") as fh:
        for rec in csv.DictReader(fh):
            if not rec[RESPONSE]:
                continue
            mol = Chem.MolFromSmiles(rec["SMILES"])
            bits = gen.GetFingerprint(mol).ToBitString()
            rows.append((f"ps{int(rec['']):03d}", float(rec[RESPONSE]), f"{int(bits, 2):0{NBITS // 4}x}"))
    with open(dst, "w", newline="") as fh:
        fh.write(f"# d={NBITS}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "response", "fp_hex"])
        for r in rows:
            w.writerow([r[0], repr(r[1]), r[2]])
    print(f"wrote {len(rows)} molecules to {dst}")


if __name__ == "__main__":
    main(*sys.argv[1:3])
