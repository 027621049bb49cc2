"""Sample the twelve scatter-matrix models and compare their Kendall's tau.

Each specification in ``demos/specs`` is loaded, sampled with the same block
random streams as ``haxc sample`` and summarised by its empirical tau matrix
next to the model value from ``CopulaModel.pair_tau``.  The samples are
written as CSV files, ready for any plotting tool.

    python demos/make_specs.py
    python demos/figure_samples.py --n 10000 --out demos/out
"""
import argparse
import json
from pathlib import Path

import numpy as np

from haxc.cli import sample_rows, write_csv
from haxc.errors import CapabilityError
from haxc.model import CopulaModel, read_seed
from haxc.validation import tau_matrix

SPECS = Path(__file__).parent / "specs"


def model_taus(model):
    d = model.d
    out = np.eye(d)
    for i in range(d):
        for j in range(i + 1, d):
            try:
                out[i, j] = out[j, i] = model.pair_tau(i, j)
            except CapabilityError:
                out[i, j] = out[j, i] = np.nan
    return out


def show(name, emp, ref):
    print(f"\n{name}")
    print("  empirical tau (upper) / model tau (lower, nan if unknown)")
    d = emp.shape[0]
    for i in range(d):
        row = [f"{ref[i, j]:6.2f}" if j < i else ("     -" if j == i else f"{emp[i, j]:6.2f}")
               for j in range(d)]
        print("  " + " ".join(row))
    known = ~np.isnan(ref) & ~np.eye(d, dtype=bool)
    if known.any():
        print(f"  max |empirical - model| = {np.max(np.abs(emp - ref)[known]):.3f}")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=10000)
    parser.add_argument("--out", type=Path, default=None, help="directory for CSV samples")
    parser.add_argument("--only", default="", help="substring filter on spec names")
    args = parser.parse_args(argv)
    paths = sorted(p for p in SPECS.glob("*.json") if args.only in p.stem)
    if not paths:
        raise SystemExit("no specifications found; run demos/make_specs.py first")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
    for path in paths:
        model = CopulaModel.from_file(path)
        u = sample_rows(model, args.n, read_seed(json.loads(path.read_text())))
        show(path.stem, tau_matrix(u), model_taus(model))
        if args.out is not None:
            write_csv(str(args.out / f"{path.stem}.csv"), [f"U{j + 1}" for j in range(model.d)], u)


if __name__ == "__main__":
    main()
