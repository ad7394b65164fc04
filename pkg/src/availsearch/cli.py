"""Command-line front end: solve, enumerate, sweep and reproduce figure data as CSV.

Exit codes: 0 ok, 2 parse error, 3 validation error, 4 no equilibrium or cost
too large, 5 internal error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import equilibrium as eqm
from . import outcomes
from .configio import read_config, write_csv
from .errors import NoEquilibrium, SearchModelError, ValidationError
from .extensions import hetero, noisy
from .market import MarketConfig
from .oracle import indifference_gap, profit_flatness, pure_optimality, simulate

REPORT_COLUMNS = ["price", "purchase", "virtual", "searches", "expenditure", "surplus"]
EQ_HEADER = ["kind", "k", "q", "stable", "marginal", "gap", "slack"] + REPORT_COLUMNS
SWEEP_HEADER = ["record", "index", "x", "branch", "k", "q"] + REPORT_COLUMNS

FIGURE1 = MarketConfig(3, 1.0, 0.05, (0.0, 0.05, 0.90, 0.05))
FIGURE1_COSTS = (0.02, 0.05, 0.11)
FIGURE34 = MarketConfig(3, 1.0, 0.04, (0.0, 0.0, 0.9, 0.1))
EXAMPLE = MarketConfig(3, 1.0, 0.05, (0.0, 0.0, 0.9, 0.1))
EXAMPLE_AFTER = (0.0, 0.0, 0.75, 0.25)


def _report_cells(rep) -> list:
    return [getattr(rep, name) for name in REPORT_COLUMNS]


def _eq_row(config, e) -> list:
    return [e.kind.label, e.k, e.q, e.stable, e.marginal, e.gap, e.slack] + _report_cells(
        outcomes.report(config, e))


def _sweep_rows(sweep) -> list:
    rows = []
    for r in sweep.rows:
        for label in sorted(r.branches):
            e, rep = r.branches[label]
            rows.append(["point", r.index, r.x, label, e.k, e.q] + _report_cells(rep))
    for label, x in sweep.boundaries:
        rows.append(["boundary", "", x, label, "", ""] + [""] * len(REPORT_COLUMNS))
    return rows


def _need_config(args):
    if not args.config:
        raise ValidationError("config-path", f"command {args.command!r} needs --config")
    return read_config(args.config)


def cmd_solve(args):
    cfg = _need_config(args).market
    eqs = eqm.stable_active(cfg)
    if not eqs:
        raise NoEquilibrium("no stable active-search equilibrium at this cost")
    return EQ_HEADER, [_eq_row(cfg, e) for e in eqs]


def cmd_enumerate(args):
    cfg = _need_config(args).market
    return EQ_HEADER, [_eq_row(cfg, e) for e in eqm.enumerate_equilibria(cfg)]


def cmd_cutoffs(args):
    cfg = _need_config(args).market
    rows = []
    for r in eqm.cutoff_table(cfg):
        lo, hi = r.pure if r.pure else (None, None)
        rows.append([r.k, lo, hi, r.mixed.lower, r.mixed.upper, r.mixed.q_star])
    return ["k", "pure_low", "pure_high", "mixed_low", "mixed_high", "q_star"], rows


def _shift_grid(args, cfg):
    amount = args.amount if args.amount is not None else cfg.theta[args.shift_from]
    return np.linspace(0.0, amount, args.grid or 50)


def cmd_sweep_theta(args):
    cfg = _need_config(args).market
    _require_shift(args)
    sweep = outcomes.sweep_theta(cfg, args.shift_to, args.shift_from, _shift_grid(args, cfg))
    return SWEEP_HEADER, _sweep_rows(sweep)


def cmd_sweep_cost(args):
    cfg = _need_config(args).market
    hi = args.c_max if args.c_max is not None else 2 * cfg.c
    lo = args.c_min if args.c_min is not None else hi / (args.grid or 50)
    sweep = outcomes.sweep_cost(cfg, np.linspace(lo, hi, args.grid or 50))
    return SWEEP_HEADER, _sweep_rows(sweep)


def _require_shift(args):
    if args.shift_to is None or args.shift_from is None:
        raise ValidationError("shift", "sweeps need --shift-to I and --shift-from J")


def cmd_noisy(args):
    parsed = _need_config(args)
    if parsed.tech is None:
        raise ValidationError("delta-missing", "noisy command needs a delta block")
    cfg, tech = parsed.market, parsed.tech
    bad = noisy.validate_tech(tech, cfg.N)
    if bad:
        raise ValidationError("delta", "; ".join(bad))
    header = ["amount", "l", "q", "price", "purchase", "virtual", "expenditure", "surplus"]
    cols = ["q", "price", "purchase", "virtual", "expenditure", "surplus"]
    if args.shift_to is not None or args.shift_from is not None:
        _require_shift(args)
        rows = []
        for a, out in noisy.noisy_sweep_theta(cfg, tech, args.shift_to, args.shift_from,
                                              _shift_grid(args, cfg)):
            l = cfg.shift(args.shift_to, args.shift_from, a).max_search
            rows.append([a, l] + ([getattr(out, k) for k in cols] if out else [""] * len(cols)))
        return header, rows
    root = noisy.noisy_solve(cfg, tech)
    out = noisy.noisy_report(cfg, tech, root.q)
    return header, [[0.0, cfg.max_search] + [getattr(out, k) for k in cols]]


def cmd_hetero(args):
    parsed = _need_config(args)
    h = parsed.hetero
    if h is None:
        raise ValidationError("lambda-missing", "hetero command needs lambda = ...")
    cols = ["q", "mu", "price", "purchase", "virtual", "expenditure", "surplus"]
    header = ["amount", "stable"] + cols
    if args.shift_to is not None or args.shift_from is not None:
        _require_shift(args)
        rows = []
        for a, out in hetero.het_sweep_theta(h, args.shift_to, args.shift_from,
                                             _shift_grid(args, parsed.market)):
            rows.append([a, True] + ([getattr(out, k) for k in cols] if out else [""] * len(cols)))
        return header, rows
    rows = []
    for r in hetero.het_solve(h):
        out = hetero.het_report(h, r.q)
        rows.append([0.0, r.stable] + [getattr(out, k) for k in cols])
    return header, rows


def cmd_validate(args):
    cfg = _need_config(args).market
    eqs = eqm.stable_active(cfg)
    if not eqs:
        raise NoEquilibrium("no stable active-search equilibrium to validate")
    header = ["kind", "k", "q", "trials", "seed", "price_mc", "price_se", "price_analytic",
              "price_z", "flatness_z", "gain", "gain_se", "indifference_z", "pass"]
    rows = []
    for e in eqs:
        rep = simulate(cfg, e, args.trials, args.seed)
        analytic = outcomes.report(cfg, e).price
        price_z = abs(rep.price.mean - analytic) / rep.price.se if rep.price.se > 0 else 0.0
        flat = profit_flatness(rep)
        gap = indifference_gap(rep)
        if e.kind is eqm.EqKind.MIXED:
            ok = flat <= 4 and gap.within(4) and price_z <= 3
        else:
            ok = flat <= 4 and pure_optimality(rep) and price_z <= 3
        rows.append([e.kind.label, e.k, e.q, rep.trials, rep.seed, rep.price.mean, rep.price.se,
                     analytic, price_z, flat, gap.gain, gap.se, gap.z, ok])
        buyer = (f"indifference z={gap.z:.3f}" if e.kind is eqm.EqKind.MIXED
                 else f"k-search optimal={pure_optimality(rep)}")
        print(f"{e.describe()}: flatness z={flat:.3f}, {buyer}, price z={price_z:.3f} -> "
              f"{'pass' if ok else 'FAIL'}", file=sys.stderr)
    return header, rows


def figure1(grid: int):
    """Benefit curve over the concatenated axis plus intersections with three costs.

    Position s in [1, 2] mixes 1 and 2 searches with q_1 = 2 - s; s in [2, 3]
    mixes 2 and 3 searches with q_2 = 3 - s.
    """
    cfg = FIGURE1
    rows = []
    for k in (1, 2):
        for s in np.linspace(k, k + 1, grid):
            q = float(k + 1 - s)
            rows.append(["curve", float(s), k, q, eqm.benefit(cfg, k, q), "", ""])
    for c in FIGURE1_COSTS:
        for e in eqm.active(eqm.enumerate_equilibria(cfg, c)):
            s = e.k + 1 - e.q
            rows.append(["intersection", s, e.k, e.q, c, e.kind.label, e.stable])
    return ["record", "s", "k", "q", "value", "kind", "stable"], rows


def figure2():
    rows = [[n, outcomes.conditional_price_fraction(10, 3, n)] for n in range(1, 11)]
    return ["n", "fraction"], rows


def figure34(grid: int, metric: str):
    sweep = outcomes.sweep_theta(FIGURE34, 3, 2, np.linspace(0.0, 0.4, grid))
    rows = []
    for r in sweep.rows:
        for label in sorted(r.branches):
            e, rep = r.branches[label]
            rows.append(["point", r.config.theta[3], label, e.q, getattr(rep, metric)])
    for label, x in sweep.boundaries:
        rows.append(["boundary", FIGURE34.theta[3] + x, label, "", ""])
    return ["record", "theta3", "branch", "q", metric], rows


def example51():
    rows = []
    for theta in (EXAMPLE.theta, EXAMPLE_AFTER):
        cfg = EXAMPLE.with_theta(theta)
        for e in eqm.stable_active(cfg):
            if e.kind is not eqm.EqKind.MIXED:
                continue
            rep = outcomes.report(cfg, e)
            rows.append([theta[3], e.k, e.q, 1.0 - e.q, rep.price, rep.virtual, rep.searches,
                         rep.expenditure, rep.surplus])
    return ["theta3", "k", "q", "share_more", "price", "virtual", "searches", "expenditure",
            "surplus"], rows


def cmd_figure(args):
    which = args.figure_id
    if which == "1":
        return figure1(args.grid or 101)
    if which == "2":
        return figure2()
    if which == "3":
        return figure34(args.grid or 50, "price")
    if which == "4":
        return figure34(args.grid or 50, "surplus")
    return example51()


COMMANDS = {
    "solve": cmd_solve,
    "enumerate": cmd_enumerate,
    "cutoffs": cmd_cutoffs,
    "sweep-theta": cmd_sweep_theta,
    "sweep-cost": cmd_sweep_cost,
    "noisy": cmd_noisy,
    "hetero": cmd_hetero,
    "validate": cmd_validate,
    "figure": cmd_figure,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="availsearch", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("figure_id", nargs="?", choices=["1", "2", "3", "4", "example51"],
                   help="figure to reproduce (figure command only)")
    p.add_argument("--config", help="config file in the key = value grammar")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--seed", type=int, default=0, help="RNG seed for validate")
    p.add_argument("--trials", type=int, default=1_000_000, help="Monte Carlo trials")
    p.add_argument("--grid", type=int, help="grid size for sweeps and figures")
    p.add_argument("--shift-to", type=int, help="sweep target index i (mass moves to theta_i)")
    p.add_argument("--shift-from", type=int, help="sweep source index j")
    p.add_argument("--amount", type=float, help="largest shifted mass (default: all of theta_j)")
    p.add_argument("--c-min", type=float, help="smallest cost in sweep-cost")
    p.add_argument("--c-max", type=float, help="largest cost in sweep-cost")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "figure" and args.figure_id is None:
        parser.error("figure needs an id: 1, 2, 3, 4 or example51")
    if args.command != "figure" and args.figure_id is not None:
        parser.error(f"unexpected argument {args.figure_id!r}")
    if not 0 <= args.seed < 2 ** 64:
        parser.error("--seed must be an unsigned 64-bit integer")
    try:
        header, rows = COMMANDS[args.command](args)
        write_csv(args.out, header, rows)
    except SearchModelError as err:
        print(f"error [{err.code}]: {err}", file=sys.stderr)
        return err.exit_status
    except OSError as err:
        print(f"error [io]: {err}", file=sys.stderr)
        return 5
    except Exception as err:  # noqa: BLE001 - last-resort mapping to the internal exit code
        print(f"error [internal]: {err!r}", file=sys.stderr)
        return 5
    return 0


if __name__ == "__main__":
    sys.exit(main())
