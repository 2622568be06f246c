"""Command line front end.

Exit codes: 0 success or the checked property holds, 1 the property fails
(unstable, not found, condition violated), 2 input error.  Results go to
stdout, warnings and errors to stderr; output depends only on the arguments.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from twoside.alternate_da import EARLY, MODIFIED, ORIGINAL, SETTLE, DaConfig, run
from twoside.conditions import check_complementarity, validate_market
from twoside.errors import InputError
from twoside.fileformat import emit, load, parse_priced
from twoside.generate import FAMILIES, GenProfile, gen
from twoside.ntu import NtuMarket, Side, fmt_bundle
from twoside.pickside import OrgMarket, run_org_da, to_contract_market
from twoside.stability import SETWISE, STABLE, enumerate_stable, is_setwise_stable, is_stable
from twoside.tu import PriceVector, TuMarket, check_full_complementarity, fmt_outcome, is_equilibrium, kappa
from twoside.tu_solver import DIRECT, TRANSFORM, is_tu_stable, solve_equilibrium

OK, FAIL, BAD_INPUT = 0, 1, 2


def _out(line: str = "") -> None:
    sys.stdout.write(line + "\n")


def _warn(line: str) -> None:
    sys.stderr.write(f"warning: {line}\n")


def _ids(text: str) -> list:
    return [x.strip() for x in text.split(",") if x.strip()]


def _ntu(path: str, untiered_ok: bool = False) -> NtuMarket:
    market = load(path)
    if isinstance(market, OrgMarket):
        return to_contract_market(market)
    if not isinstance(market, NtuMarket):
        raise InputError(f"{path}: expected an ntu or org market")
    if not market.tiered and not untiered_ok:
        raise InputError(f"{path}: market is untiered; pass --untiered to check it")
    return market


def _tu(path: str) -> TuMarket:
    market = load(path)
    if not isinstance(market, TuMarket):
        raise InputError(f"{path}: expected a tu market")
    return market


def cmd_validate(args) -> int:
    market = load(args.file)
    if isinstance(market, TuMarket):
        if args.profile not in (None, "tu-full"):
            raise InputError(f"profile {args.profile} applies to ntu markets")
        report = check_full_complementarity(market)
        for line in report.lines():
            _out(line)
        return OK if report.ok else FAIL
    if args.profile == "tu-full":
        raise InputError("profile tu-full applies to tu markets")
    if isinstance(market, OrgMarket):
        conv = to_contract_market(market)
        bad = [(o, check_complementarity(conv, o)) for o in market.orgs]
        bad = [(o, v) for o, v in bad if v is not None]
        _out(f"org-complementarity {'ok' if not bad else 'fails'}")
        for _, v in bad:
            _out("violation " + v.describe())
        return OK if not bad else FAIL
    report = validate_market(market, args.profile or "full")
    for line in report.lines():
        _out(line)
    return OK if report.ok else FAIL


def cmd_solve(args) -> int:
    market = _ntu(args.file)
    if args.skip_validation:
        _warn("validation skipped; the output is only guaranteed stable when the market passes the full profile")
    else:
        report = validate_market(market, "full")
        if not report.ok:
            _warn(f"market fails the full profile ({report.violations[0].describe()}); the output may be unstable")
    cfg = DaConfig(Side(args.start_side), args.variant, args.exit_rule)
    outcome, trace = run(market, cfg)
    text = trace.to_text()
    if args.trace == "-":
        sys.stdout.write(text)
    else:
        if args.trace:
            with open(args.trace, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        _out(text.splitlines()[-1])
    return OK


def cmd_check(args) -> int:
    market = _ntu(args.file, args.untiered)
    outcome = _ids(args.outcome)
    verdict = is_setwise_stable(market, outcome) if args.setwise else is_stable(market, outcome)
    _out(f"outcome={fmt_bundle(outcome)} {'setwise-stable' if args.setwise and verdict.stable else verdict.line()}")
    return OK if verdict.stable else FAIL


def cmd_enumerate(args) -> int:
    market = _ntu(args.file, args.untiered)
    found = enumerate_stable(market, SETWISE if args.setwise else STABLE)
    for y in found:
        _out(fmt_bundle(y))
    _out(f"count={len(found)}")
    return OK if found else FAIL


def cmd_pickside(args) -> int:
    market = load(args.file)
    if not isinstance(market, OrgMarket):
        raise InputError(f"{args.file}: expected an org market")
    _, trace = run_org_da(market, args.first_org)
    sys.stdout.write(trace.to_text())
    return OK


def cmd_solve_tu(args) -> int:
    market = _tu(args.file)
    cert = solve_equilibrium(market, args.route)
    if cert is None:
        _out("no-equilibrium")
        return FAIL
    for line in cert.lines():
        _out(line)
    _out(f"outcome={fmt_outcome(kappa(cert.allocation, cert.prices))}")
    return OK


def cmd_check_tu(args) -> int:
    market = _tu(args.file)
    with open(args.prices, encoding="utf-8") as fh:
        prices = PriceVector(parse_priced(fh.read()))
    missing = sorted(market.omega - set(prices.transfers))
    if missing:
        raise InputError(f"{args.prices}: no price for {', '.join(missing)}")
    ok, agent = is_equilibrium(market, _ids(args.allocation), prices)
    _out("equilibrium" if ok else f"not-equilibrium agent={agent}")
    return OK if ok else FAIL


def cmd_block_tu(args) -> int:
    market = _tu(args.file)
    with open(args.outcome, encoding="utf-8") as fh:
        outcome = parse_priced(fh.read())
    verdict = is_tu_stable(market, outcome.items())
    if verdict.stable:
        _out("stable")
    else:
        lines = verdict.witness.lines() if hasattr(verdict.witness, "lines") else [verdict.witness.line()]
        for line in lines:
            _out(line)
    return OK if verdict.stable else FAIL


def cmd_gen(args) -> int:
    sizes = {k: getattr(args, k) for k in ("n_left", "n_center", "n_right", "n_contracts", "n_applicants")}
    sizes = {k: v for k, v in sizes.items() if v is not None}
    text = emit(gen(GenProfile(seed=args.seed, family=args.family, **sizes)))
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twoside", description="Two-sided contract markets: stability and equilibria.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check preference or valuation conditions")
    s.add_argument("file")
    s.add_argument("--profile", choices=["full", "pick-one-side", "tu-full"])
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("solve", help="run alternate deferred acceptance")
    s.add_argument("file")
    s.add_argument("--start-side", choices=["left", "right"], default="left")
    s.add_argument("--variant", choices=[ORIGINAL, MODIFIED], default=ORIGINAL)
    s.add_argument("--exit-rule", choices=[SETTLE, EARLY], default=SETTLE)
    s.add_argument("--trace", metavar="OUT", help="write the trace to OUT ('-' for stdout)")
    s.add_argument("--skip-validation", action="store_true")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("check", help="test one outcome for stability")
    s.add_argument("file")
    s.add_argument("--outcome", required=True, help="comma-separated contract ids (empty for no contracts)")
    s.add_argument("--setwise", action="store_true")
    s.add_argument("--untiered", action="store_true", help="accept a market without tiers")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("enumerate", help="list every stable outcome")
    s.add_argument("file")
    s.add_argument("--setwise", action="store_true")
    s.add_argument("--untiered", action="store_true")
    s.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("pickside", help="run the two-organization proposal procedure")
    s.add_argument("file")
    s.add_argument("--first-org", metavar="ID")
    s.set_defaults(func=cmd_pickside)

    s = sub.add_parser("solve-tu", help="find a competitive equilibrium")
    s.add_argument("file")
    s.add_argument("--route", choices=[DIRECT, TRANSFORM], default=DIRECT)
    s.set_defaults(func=cmd_solve_tu)

    s = sub.add_parser("check-tu", help="test an allocation and prices for equilibrium")
    s.add_argument("file")
    s.add_argument("--allocation", required=True)
    s.add_argument("--prices", required=True, metavar="FILE")
    s.set_defaults(func=cmd_check_tu)

    s = sub.add_parser("block-tu", help="test a priced outcome for stability")
    s.add_argument("file")
    s.add_argument("--outcome", required=True, metavar="FILE")
    s.set_defaults(func=cmd_block_tu)

    s = sub.add_parser("gen", help="generate a random market")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--family", choices=list(FAMILIES), required=True)
    s.add_argument("--out", metavar="FILE")
    for name in ("n-left", "n-center", "n-right", "n-contracts", "n-applicants"):
        s.add_argument(f"--{name}", type=int)
    s.set_defaults(func=cmd_gen)
    return p


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return BAD_INPUT if exc.code else OK
    try:
        return args.func(args)
    except (InputError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
