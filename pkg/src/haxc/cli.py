"""Command-line interface: ``haxc sample|density|stdf|check``.

Exit codes: 0 success, 1 invalid input or failed checks, 2 unsupported
model or operation, 3 other runtime failures.

Sampling is split into blocks of ``BLOCK_ROWS`` rows.  Block ``b`` draws from
a Philox stream keyed by ``(seed, b)``, so the output depends only on the
seed and ``n``, not on the number of threads.
"""
import argparse
import csv
import io
import itertools
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import CapabilityError, ConfigError, DomainError, NumericalError, StructureError
from .evc import SpectralEvc
from .dnorm import mc_stdf
from .model import CopulaModel, read_seed
from .validation import empirical_cdf, kendall_tau, ks_critical, ks_uniform

BLOCK_ROWS = 4096
EXIT_OK, EXIT_INVALID, EXIT_CAPABILITY, EXIT_RUNTIME = 0, 1, 2, 3

#: tolerance on |tau_hat - tau| at n = 10^4, scaled by sqrt(10^4 / n) below that
TAU_TOL = 0.03
#: binomial standard errors allowed in CLI CDF checks
CDF_SE = 4.0
# stdfs whose evaluation needs a d-dimensional normal or t CDF per point
EXPENSIVE_STDFS = ("husler_reiss", "extremal_t")


def block_rng(seed, block):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def sample_rows(model, n, seed, threads=1):
    """``n`` rows from ``model``, reproducible for a given seed."""
    sizes = [min(BLOCK_ROWS, n - s) for s in range(0, n, BLOCK_ROWS)]

    def run(b):
        return model.sample(sizes[b], block_rng(seed, b))

    if threads > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(b) for b in range(len(sizes))]
    return np.vstack(parts) if parts else np.empty((0, model.d))


def _fmt(v):
    return format(float(v), ".17g")


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])
    if path in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())


def read_points(path, d):
    """Read a CSV of points; a non-numeric first line is taken as a header."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if rows:
        try:
            [float(c) for c in rows[0]]
        except ValueError:
            rows = rows[1:]
    out = []
    for i, r in enumerate(rows, start=1):
        if len(r) != d:
            raise StructureError(
                f"{path}: row {i} has {len(r)} columns but the model has dimension {d}")
        try:
            out.append([float(c) for c in r])
        except ValueError:
            raise StructureError(f"{path}: row {i} is not numeric") from None
    return np.array(out, dtype=float).reshape(-1, d)


def _load(args):
    with open(args.spec, encoding="utf-8") as fh:
        text = fh.read()
    model = CopulaModel.from_json(text, source=args.spec)
    seed = args.seed if getattr(args, "seed", None) is not None else read_seed(json.loads(text))
    if not 0 <= seed < 2 ** 64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return model, seed


# -- subcommands -----------------------------------------------------------
def cmd_sample(args):
    model, seed = _load(args)
    if args.n < 1:
        raise DomainError("--n must be >= 1")
    u = sample_rows(model, args.n, seed, args.threads)
    write_csv(args.out, model.names, u)
    return EXIT_OK


def cmd_density(args):
    model, _ = _load(args)
    if args.points is None:
        raise ConfigError("density needs --points")
    pts = read_points(args.points, model.d)
    rows, bad = [], 0
    for i, p in enumerate(pts, start=1):
        if np.any(p <= 0) or np.any(p >= 1) or np.any(np.isnan(p)):
            rows.append([i, "", "point outside the open unit cube"])
            bad += 1
            continue
        try:
            rows.append([i, float(model.log_density(p)), ""])
        except (DomainError, NumericalError) as exc:
            rows.append([i, "", str(exc)])
            bad += 1
    write_csv(args.out, ["row", "log_density", "error"], rows)
    if bad:
        print(f"{bad} of {len(pts)} rows could not be evaluated", file=sys.stderr)
    return EXIT_INVALID if bad else EXIT_OK


def cmd_stdf(args):
    model, seed = _load(args)
    if args.points is None:
        raise ConfigError("stdf needs --points")
    stdf = model.stdf if model.stdf is not None else model.evc.stdf()
    pts = read_points(args.points, model.d)
    vals = stdf(pts) if len(pts) else np.empty(0)
    header, rows = ["row", "ell"], [[i + 1, float(v)] for i, v in enumerate(np.atleast_1d(vals))]
    if args.mc:
        if not isinstance(model.evc, SpectralEvc):
            raise CapabilityError("--mc needs a spectral EVC with a d-norm generator")
        header += ["mc", "mc_se"]
        gen = model.evc.generator
        for i, x in enumerate(pts):
            est, se = mc_stdf(gen, x, args.mc, block_rng(seed, i))
            rows[i] += [float(est), float(se)]
    write_csv(args.out, header, rows)
    return EXIT_OK


def run_checks(model, level, n, seed):
    """Margin, Kendall's tau and (full level) CDF checks on a fresh sample."""
    u = sample_rows(model, n, seed)
    checks = []

    def add(name, stat, thr, ok):
        checks.append({"name": name, "statistic": float(stat), "threshold": float(thr),
                       "passed": bool(ok)})

    crit = ks_critical(n)
    for j in range(model.d):
        ks = ks_uniform(u[:, j])
        add(f"ks_uniform[{model.names[j]}]", ks, crit, ks <= crit)
    tol = TAU_TOL * max(1.0, np.sqrt(1e4 / n))
    for i in range(model.d):
        for j in range(i + 1, model.d):
            tau = model.pair_tau(i, j)
            if tau is None:
                continue
            err = abs(kendall_tau(u[:, i], u[:, j]) - tau)
            add(f"kendall_tau[{model.names[i]},{model.names[j]}] vs {tau:.4f}", err, tol, err <= tol)
    if level == "full":
        rng = block_rng(seed, 2 ** 32)
        grid = (0.25, 0.5, 0.75)
        stdf = model.stdf
        if stdf is None and model.evc is not None:
            try:
                stdf = model.evc.stdf()
            except CapabilityError:
                pass
        if model.d > 2 and getattr(stdf, "variant", None) in EXPENSIVE_STDFS:
            # other coordinates at 1 drop out of ell, so each point needs only
            # bivariate t / normal CDFs instead of a d-dimensional one
            fill, pairs = 1.0, [(0, 1), (0, model.d - 1)]
        else:
            fill, pairs = 0.8, [(0, min(1, model.d - 1))]
        for i, j in pairs:
            for a, b in itertools.product(grid, grid):
                pt = np.full(model.d, fill)
                pt[i], pt[j] = a, b
                emp, se_emp = empirical_cdf(u, pt)
                try:
                    ref, se_ref = model.cdf(pt), 0.0
                except CapabilityError:
                    ref, se_ref = model.conditional_cdf(pt, rng)
                se = np.hypot(se_emp, se_ref)
                name = f"cdf[{a},{b}]" if fill != 1.0 else f"cdf[{model.names[i]}={a},{model.names[j]}={b}]"
                add(name, abs(emp - ref), CDF_SE * se, abs(emp - ref) <= CDF_SE * se)
    return checks


def cmd_check(args):
    model, seed = _load(args)
    n = args.n or (10 ** 4 if args.level == "quick" else 10 ** 5)
    checks = run_checks(model, args.level, n, seed)
    passed = all(c["passed"] for c in checks)
    for c in checks:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}: "
              f"{c['statistic']:.4g} (threshold {c['threshold']:.4g})")
    print(f"{'PASS' if passed else 'FAIL'}: {sum(c['passed'] for c in checks)}/{len(checks)} checks")
    report = {"spec": args.spec, "kind": model.kind, "level": args.level, "n": n, "seed": seed,
              "passed": passed, "checks": checks}
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
    return EXIT_OK if passed else EXIT_INVALID


# -- entry point -----------------------------------------------------------
def build_parser():
    p = argparse.ArgumentParser(prog="haxc", description="Sample and evaluate Archimax copulas.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--spec", required=True, help="model specification (JSON)")
        sp.add_argument("--out", default=None, help="output file (default: stdout)")

    sp = sub.add_parser("sample", help="draw a sample and write it as CSV")
    common(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--threads", type=int, default=1)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("density", help="log-density at the points of a CSV file")
    common(sp)
    sp.add_argument("--points", required=True)
    sp.set_defaults(func=cmd_density)

    sp = sub.add_parser("stdf", help="stable tail dependence function at CSV points")
    common(sp)
    sp.add_argument("--points", required=True)
    sp.add_argument("--mc", type=int, default=0, help="also estimate by Monte Carlo with this many draws")
    sp.add_argument("--seed", type=int, default=None)
    sp.set_defaults(func=cmd_stdf)

    sp = sub.add_parser("check", help="statistical checks of the sampler")
    common(sp)
    sp.add_argument("--level", choices=("quick", "full"), default="quick")
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.set_defaults(func=cmd_check)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CapabilityError as exc:
        print(f"haxc: unsupported: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (DomainError, StructureError, ConfigError, FileNotFoundError) as exc:
        print(f"haxc: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - last-resort report for the exit code contract
        print(f"haxc: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
