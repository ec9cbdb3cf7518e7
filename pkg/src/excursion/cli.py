"""Command-line surface: model inspection, tail formulas, Monte Carlo runs.

Commands
--------
models     list the built-in model recipes
validate   build a model and run the contract checks
asym       assemble the tail formula P(sup X > u) ~ K u^rho Psi(u)
mc         crude Monte Carlo exceedance estimates, CSV output
compare    tail formula vs Monte Carlo, one CSV row per level
constants  homogeneous-case constant estimates / convergence tables

Reproducibility: every stochastic command requires --seed, and rerunning
with the same seed produces byte-identical CSV regardless of --threads.
The constants cache directory is taken from the environment variable
EXCURSION_CACHE when set.

Config files are JSON with a mandatory ``schema_version: 1`` and the
same keys as the command flags, e.g.::

    {"schema_version": 1, "model": "bessel:d=2",
     "u": [2.5, 3.0, 3.5], "n": 100000, "seed": 7, "format": "csv"}

Exit codes: 0 success, 2 regime-classification failure, 3 mesh-rule
refusal, 1 any other error.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

import numpy as np

from .asymptotics import asym_general
from .constants import ConstantsPolicy, known_constant, pickands_estimate
from .model import (
    ClassificationError,
    ModelError,
    build_model,
    classify_regime,
    load_config,
)
from .montecarlo import (
    CSV_COLUMNS,
    MeshRuleError,
    compare_table,
    mc_exceedance,
    write_csv,
)
from .simulate import GridSpec
from .zoo import list_models

__all__ = ["main"]

ASYM_COLUMNS = (
    "model_id", "component", "regime", "K", "K_lo", "K_hi", "rho",
    "log_power", "dominance_u",
)

CONSTANTS_COLUMNS = ("T", "delta", "n", "estimate", "std_err")


class _Parser(argparse.ArgumentParser):
    """Argument errors are 'other errors': exit 1, not argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, "%s: error: %s\n" % (self.prog, message))


def _float_list(text):
    try:
        return tuple(float(x) for x in str(text).split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected a comma-separated number list, got %r" % text)


def _build_parser():
    parser = _Parser(prog="excursion", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    def add(name, help_text, model=True, stochastic=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file (schema_version 1)")
        if model:
            p.add_argument("--model", help="inline recipe, e.g. power:alpha=1,beta=2,a=1")
        if stochastic:
            p.add_argument("--u", type=_float_list, help="comma-separated levels")
            p.add_argument("--n", type=int, help="number of Monte Carlo paths")
            p.add_argument("--seed", type=int, help="master seed (required)")
            p.add_argument("--grid", type=int, help="uniform time nodes per domain axis")
            p.add_argument("--threads", type=int, help="worker threads (output-invariant)")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "human"), dest="fmt", help="output format")
        return p

    add("models", "list built-in model recipes", model=False)
    add("validate", "build a model and run contract checks")

    p = add("asym", "assemble the tail formula for a model")
    p.add_argument("--u", type=_float_list, help="levels at which to evaluate the formula")
    for flag, typ in (("--T", float), ("--S", float), ("--delta", float), ("--n", int), ("--seed", int)):
        p.add_argument(flag, type=typ, help="constants policy parameter")

    add("mc", "Monte Carlo exceedance estimates (CSV)", stochastic=True)
    add("compare", "tail formula vs Monte Carlo per level (CSV)", stochastic=True)

    p = sub.add_parser("constants", help="homogeneous-case constant tables")
    p.add_argument("--config", help="JSON config file (schema_version 1)")
    p.add_argument("--alpha", type=float, help="local correlation exponent in (0, 2]")
    p.add_argument("--T", type=_float_list, help="window lengths for the convergence table")
    p.add_argument("--delta", type=float, help="window step (default 0.01)")
    p.add_argument("--n", type=int, help="paths per window estimate (default 10000)")
    p.add_argument("--seed", type=int, help="master seed (required for estimates)")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "human"), dest="fmt", help="output format")
    return parser


# ---------------------------------------------------------------------------
# Config merging and small helpers


def _load_cfg(args):
    path = getattr(args, "config", None)
    return load_config(path) if path else {}


def _get(args, cfg, name, default=None):
    val = getattr(args, name, None)
    if val is not None:
        return val
    if name in cfg:
        return cfg[name]
    return default


def _require_model(args, cfg):
    spec = _get(args, cfg, "model")
    if spec is None:
        raise ModelError("no model given; pass --model or a config with a 'model' entry")
    return build_model(spec)


def _check_levels(u_list):
    if u_list is None:
        raise ModelError("no levels given; pass --u")
    u = tuple(float(x) for x in u_list)
    if any(b <= a for a, b in zip(u, u[1:])):
        raise ModelError("u list must be strictly increasing")
    return u


def _require_seed(args, cfg):
    seed = _get(args, cfg, "seed")
    if seed is None:
        raise ModelError("stochastic command refused: --seed is required")
    return int(seed)


def _make_grid(model, grid_n):
    axes = tuple(np.linspace(lo, hi, int(grid_n)) for lo, hi in model.domain.bounds)
    return GridSpec(axes)


def _open_out(args, cfg):
    out = _get(args, cfg, "out")
    if out is None:
        return sys.stdout, False
    return open(out, "w", encoding="ascii", newline="\n"), True


def _emit_rows(args, cfg, rows, columns, default_fmt):
    fmt = _get(args, cfg, "fmt", cfg.get("format", default_fmt))
    handle, own = _open_out(args, cfg)
    try:
        if fmt == "csv":
            _write_generic_csv(rows, columns, handle)
        else:
            _write_table(rows, columns, handle)
    finally:
        if own:
            handle.close()
    return 0


def _write_generic_csv(rows, columns, handle):
    if columns is CSV_COLUMNS:
        write_csv(rows, handle)
        return
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in columns])


def _cell(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return "%d" % value
    return "%.10g" % value


def _write_table(rows, columns, handle):
    cells = [[str(c) for c in columns]] + [[_cell(r[c]) for c in columns] for r in rows]
    widths = [max(len(line[i]) for line in cells) for i in range(len(columns))]
    for line in cells:
        handle.write("  ".join(s.rjust(w) for s, w in zip(line, widths)).rstrip() + "\n")


def _policy_from(args, cfg):
    keys = ("T", "S", "delta", "n", "seed")
    given = {k: _get(args, cfg, k) for k in keys}
    if all(v is None for v in given.values()):
        return None
    defaults = ConstantsPolicy()
    return ConstantsPolicy(
        T=float(given["T"]) if given["T"] is not None else defaults.T,
        S=float(given["S"]) if given["S"] is not None else defaults.S,
        delta=float(given["delta"]) if given["delta"] is not None else defaults.delta,
        n=int(given["n"]) if given["n"] is not None else defaults.n,
        seed=given["seed"],
    )


# ---------------------------------------------------------------------------
# Commands


def cmd_models(args):
    cfg = _load_cfg(args)
    rows = [
        {
            "id": m["id"],
            "regime": m["regime"],
            "reference": "yes" if m["reference"] else "no",
            "description": m["description"],
        }
        for m in list_models()
    ]
    return _emit_rows(args, cfg, rows, ("id", "regime", "reference", "description"), "human")


def cmd_validate(args):
    cfg = _load_cfg(args)
    model = _require_model(args, cfg)  # build_model already runs the contract checks
    regime = classify_regime(model)
    handle, own = _open_out(args, cfg)
    try:
        handle.write("model %s: OK\n" % model.model_id)
        handle.write("regime: %s (%d probes conclusive)\n" % (regime.tag, len(regime.evidence)))
        for comp, tag in regime.component_tags:
            handle.write("  component %s: %s\n" % (comp, tag))
    finally:
        if own:
            handle.close()
    return 0


def cmd_asym(args):
    cfg = _load_cfg(args)
    model = _require_model(args, cfg)
    result = asym_general(model, policy=_policy_from(args, cfg))
    fmt = _get(args, cfg, "fmt", cfg.get("format", "human"))
    if fmt == "csv":
        rows = [
            {
                "model_id": result.model_id,
                "component": c.label,
                "regime": c.regime,
                "K": c.K,
                "K_lo": c.K_lo,
                "K_hi": c.K_hi,
                "rho": c.rho,
                "log_power": c.log_power,
                "dominance_u": result.dominance_u,
            }
            for c in result.components
        ]
        return _emit_rows(args, cfg, rows, ASYM_COLUMNS, "csv")
    handle, own = _open_out(args, cfg)
    try:
        lead = result.leading
        handle.write("model: %s\n" % result.model_id)
        handle.write("regime: %s\n" % result.regime)
        handle.write("formula: %s\n" % result.formula())
        handle.write("K = %.10g  band [%.10g, %.10g]\n" % (lead.K, lead.K_lo, lead.K_hi))
        handle.write("rho = %.10g\n" % lead.rho)
        slow = "log(u)^%g" % lead.log_power if lead.log_power else ("numeric L(u)" if lead.L is not None else "1")
        handle.write("slow factor: %s\n" % slow)
        if len(result.components) > 1:
            handle.write("components (leading dominates 10x for u >= %.3g):\n" % result.dominance_u)
            for c in result.components:
                handle.write(
                    "  %s: K=%.6g [%.6g, %.6g]  rho=%.6g  %s\n"
                    % (c.label, c.K, c.K_lo, c.K_hi, c.rho, c.regime)
                )
        for u in _get(args, cfg, "u") or ():
            lo, hi = result.evaluate_band(u)
            handle.write("P(%g) ~ %.6g  band [%.6g, %.6g]\n" % (u, result.evaluate(u), lo, hi))
    finally:
        if own:
            handle.close()
    return 0


def _mc_rows(model, u_list, n, seed, grid, threads):
    """CSV rows for crude MC runs; asym cells stay empty for levels u <= 1."""
    asym = asym_general(model) if any(u > 1.0 for u in u_list) else None
    rows = []
    for u in u_list:
        est = mc_exceedance(model, u, grid=grid, n=n, seed=seed, threads=threads)
        if asym is not None and u > 1.0:
            a_val = float(asym.evaluate(u))
            a_lo, a_hi = asym.evaluate_band(u)
            ratio = est.p_hat / a_val if a_val else math.inf
        else:
            a_val = a_lo = a_hi = ratio = ""
        rows.append(
            {
                "model_id": model.model_id,
                "u": float(u),
                "asym_value": a_val,
                "asym_lo": a_lo,
                "asym_hi": a_hi,
                "p_hat": est.p_hat,
                "ci_lo": est.ci_lo,
                "ci_hi": est.ci_hi,
                "ratio": ratio,
                "n_paths": est.n_paths,
                "mesh": max(est.grid.mesh),
                "seed": est.seed,
            }
        )
    return rows


def _run_mc(args, compare):
    cfg = _load_cfg(args)
    model = _require_model(args, cfg)
    u_list = _check_levels(_get(args, cfg, "u"))
    seed = _require_seed(args, cfg)
    n = int(_get(args, cfg, "n", 10**4))
    threads = int(_get(args, cfg, "threads", 1))
    grid_n = _get(args, cfg, "grid")
    grid = _make_grid(model, grid_n) if grid_n is not None else None
    if compare:
        if u_list[0] <= 1.0:
            raise ModelError("compare needs levels u > 1 (the tail formula regime)")
        rows = compare_table(model, u_list, n=n, seed=seed, grid=grid, threads=threads)
    else:
        rows = _mc_rows(model, u_list, n, seed, grid, threads)
    return _emit_rows(args, cfg, rows, CSV_COLUMNS, "csv")


def cmd_mc(args):
    return _run_mc(args, compare=False)


def cmd_compare(args):
    return _run_mc(args, compare=True)


def cmd_constants(args):
    cfg = _load_cfg(args)
    alpha = _get(args, cfg, "alpha")
    if alpha is None:
        raise ModelError("constants needs --alpha")
    alpha = float(alpha)
    t_list = _get(args, cfg, "T")
    rows = []
    if t_list is None:
        closed = known_constant(alpha)
        if closed is None:
            raise ModelError(
                "no closed form for alpha=%g; pass --T for the estimator table" % alpha
            )
        rows.append({"T": math.inf, "delta": 0.0, "n": 0, "estimate": closed, "std_err": 0.0})
    else:
        seed = _require_seed(args, cfg)
        delta = float(_get(args, cfg, "delta", 0.01))
        n = int(_get(args, cfg, "n", 10**4))
        for t_val in t_list:
            est = pickands_estimate(alpha, float(t_val), delta, n, seed)
            rows.append(
                {
                    "T": float(t_val),
                    "delta": delta,
                    "n": n,
                    "estimate": est.value,
                    "std_err": est.std_err,
                }
            )
    return _emit_rows(args, cfg, rows, CONSTANTS_COLUMNS, "csv")


_COMMANDS = {
    "models": cmd_models,
    "validate": cmd_validate,
    "asym": cmd_asym,
    "mc": cmd_mc,
    "compare": cmd_compare,
    "constants": cmd_constants,
}


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ClassificationError as exc:
        print("classification error: %s" % exc, file=sys.stderr)
        return 2
    except MeshRuleError as exc:
        print("mesh rule: %s" % exc, file=sys.stderr)
        return 3
    except BrokenPipeError:
        return 1
    except (ModelError, ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
