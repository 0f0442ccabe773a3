"""Generate the committed FCIDUMP fixtures and their manifest.

The four scan sets (H2, LiH, H2O, Li2O) are produced in canonical RHF
orbitals, STO-3G, at the geometry grids below; frozen cores and the LiH
pi-orbital exclusions are recorded in the manifest and applied downstream by
the consumer, never here. The manifest also records the RHF total energy and
a sha256 of each file so regeneration can be verified.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .rhf import run_rhf

H2O_ANGLE_DEG = 109.57

# molecule -> (electron count, geometry builder, scan radii in angstrom)
def _geom_h2(r):
    return [("H", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, r))]


def _geom_lih(r):
    return [("Li", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, r))]


def _geom_h2o(r):
    half = math.radians(H2O_ANGLE_DEG) / 2.0
    return [("O", (0.0, 0.0, 0.0)),
            ("H", (r * math.sin(half), 0.0, r * math.cos(half))),
            ("H", (-r * math.sin(half), 0.0, r * math.cos(half)))]


def _geom_li2o(r):
    return [("O", (0.0, 0.0, 0.0)),
            ("Li", (0.0, 0.0, r)),
            ("Li", (0.0, 0.0, -r))]


MOLECULES = {
    "h2": (2, _geom_h2, [0.74, 1.74]),
    "lih": (4, _geom_lih, [1.2, 1.4, 1.6, 2.0, 2.4, 3.0, 3.6, 4.2]),
    "h2o": (10, _geom_h2o, [0.80, 0.96, 1.20, 1.44, 1.68, 1.92]),
    "li2o": (14, _geom_li2o, [1.30, 1.45, 1.60, 1.80, 2.00, 2.20, 2.40, 3.00, 4.00]),
}

CORE_ORBITALS = {"h2": 0, "lih": 1, "h2o": 1, "li2o": 3}


def write_fcidump(path, h_mo, eri_mo, e_nuc, n_elec, thresh=1e-12):
    """Symmetry-compressed FCIDUMP: i >= j, k >= l, (ij) >= (kl)."""
    n = h_mo.shape[0]
    lines = [f" &FCI NORB={n},NELEC={n_elec},MS2=0,",
             "  ORBSYM=" + "1," * n,
             "  ISYM=1,",
             " &END"]

    def fmt(val, i, j, k, l):
        return f" {val: .16e} {i:4d} {j:4d} {k:4d} {l:4d}"

    for i in range(n):
        for j in range(i + 1):
            ij = i * (i + 1) // 2 + j
            for k in range(n):
                for l in range(k + 1):
                    kl = k * (k + 1) // 2 + l
                    if ij < kl:
                        continue
                    val = eri_mo[i, j, k, l]
                    if abs(val) > thresh:
                        lines.append(fmt(val, i + 1, j + 1, k + 1, l + 1))
    for i in range(n):
        for j in range(i + 1):
            if abs(h_mo[i, j]) > thresh:
                lines.append(fmt(h_mo[i, j], i + 1, j + 1, 0, 0))
    lines.append(fmt(e_nuc, 0, 0, 0, 0))
    Path(path).write_text("\n".join(lines) + "\n")


def identify_lih_pi_orbitals(result, n_frozen):
    """Active-space indices of the two MOs living purely on Li 2px/2py."""
    pi_ao = [idx for idx, (sym, lmn) in enumerate(result.ao_labels)
             if sym == "Li" and lmn in ((1, 0, 0), (0, 1, 0))]
    excluded = []
    n = result.mo_coeff.shape[1]
    for mo in range(n_frozen, n):
        coeff = result.mo_coeff[:, mo]
        weight = sum(coeff[a] ** 2 for a in pi_ao) / float(coeff @ coeff)
        if weight > 0.999:
            excluded.append(mo - n_frozen)
    return excluded


def generate(molecule, r, out_dir):
    """One FCIDUMP plus its manifest entry."""
    n_elec, builder, _ = MOLECULES[molecule]
    atoms = builder(r)
    result = run_rhf(atoms, n_elec)

    label = f"{r:.2f}"
    fname = f"{molecule}_{label}.fcidump"
    path = Path(out_dir) / fname
    write_fcidump(path, result.h_mo, result.eri_mo, result.e_nuc, n_elec)

    n_frozen = CORE_ORBITALS[molecule]
    frozen = list(range(n_frozen))
    excluded = identify_lih_pi_orbitals(result, n_frozen) if molecule == "lih" else []

    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    return {
        "molecule": molecule,
        "label": label,
        "r_angstrom": r,
        "basis": "STO-3G",
        "geometry_angstrom": [[sym, list(xyz)] for sym, xyz in atoms],
        "n_orb": int(result.h_mo.shape[0]),
        "n_elec": n_elec,
        "frozen": frozen,
        "excluded_active": excluded,
        "rhf_energy": result.e_total,
        "file": fname,
        "sha256": digest,
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(Path(__file__).resolve().parents[3].parent / "fixtures"),
                        help="output directory (default: ../fixtures relative to the repo root)")
    parser.add_argument("--molecules", nargs="*", default=sorted(MOLECULES),
                        choices=sorted(MOLECULES))
    args = parser.parse_args(argv)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for molecule in args.molecules:
        _, _, radii = MOLECULES[molecule]
        for r in radii:
            entry = generate(molecule, r, out_dir)
            entries.append(entry)
            print(f"{molecule} R={r:.2f}: RHF = {entry['rhf_energy']:.10f} Ha -> {entry['file']}")

    manifest = {
        "basis": "STO-3G",
        "orbitals": "canonical RHF, phases fixed by making each MO's "
                    "largest-magnitude coefficient positive",
        "h2o_angle_deg": H2O_ANGLE_DEG,
        "li2o_grid_note": "scan grid reconstructed around the reported "
                          "hardware points; not an authoritative geometry set",
        "entries": entries,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {len(entries)} fixtures + manifest to {out_dir}")


if __name__ == "__main__":
    main()
