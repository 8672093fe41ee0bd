"""Command-line front end: classify, evaluate, verify, sweep.

Exit codes: 0 success (or skips only), 1 usage / invalid input,
2 unsupported case, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import sympy

from .errors import GaussSignError, InvalidInput, UnsupportedCase
from .field_theory import mult_order
from .oracle import DEFAULT_BUDGET, verify
from .resolver import classify, resolve

EXIT_OK, EXIT_USAGE, EXIT_UNSUPPORTED, EXIT_VERIFY = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class SweepConfig:
    q_max: int
    N_range: tuple[int, int]
    p_range: tuple[int, int]
    index_filter: str = "both"
    output_path: str | None = None
    format: str = "text"
    jobs: int = 1

    def __post_init__(self):
        if self.q_max < 2:
            raise InvalidInput("q_max must be at least 2")
        if self.jobs < 1:
            raise InvalidInput("jobs must be at least 1")
        if self.N_range[0] > self.N_range[1] or self.p_range[0] > self.p_range[1]:
            raise InvalidInput("empty range")


def sweep_pairs(cfg: SweepConfig) -> list[tuple[int, int, int, int]]:
    """(N, p, f, e) with odd prime p, gcd(N, p) = 1, q <= q_max and the index filter.

    Index 4 is restricted to odd N.
    """
    out = []
    for N in range(max(cfg.N_range[0], 3), cfg.N_range[1] + 1):
        phi = int(sympy.totient(N))
        for p in sympy.primerange(max(cfg.p_range[0], 3), cfg.p_range[1] + 1):
            if N % p == 0:
                continue
            f = mult_order(p, N)
            if p**f > cfg.q_max:
                continue
            e = phi // f
            if e == 2 and cfg.index_filter in ("2", "both"):
                out.append((N, p, f, e))
            elif e == 4 and N % 2 and cfg.index_filter in ("4", "both"):
                out.append((N, p, f, e))
    return sorted(out)


def run_case(N: int, p: int, budget: int) -> dict:
    """One sweep row: pass, fail, skipped or error."""
    row = {"N": N, "p": p}
    try:
        cf = resolve(N, p)
    except UnsupportedCase as exc:
        row.update(status="skipped", reason=exc.detail)
        return row
    except GaussSignError as exc:
        row.update(status="error", reason=str(exc))
        return row
    rep = verify(cf, budget=budget)
    row.update(
        status="pass" if rep.passed and rep.status == "pass" else ("fail" if not rep.passed else rep.status),
        form=cf.form_kind,
        closed_form=cf.to_dict(),
        message=rep.message,
    )
    return row


def _run_pair(pair: tuple[int, int], budget: int) -> dict:
    return run_case(pair[0], pair[1], budget)


def run_sweep(cfg: SweepConfig) -> list[dict]:
    """Rows in (N, p) order; cases run in worker processes when jobs > 1."""
    pairs = [(N, p) for N, p, _, _ in sweep_pairs(cfg)]
    work = partial(_run_pair, budget=cfg.q_max)
    if cfg.jobs == 1 or len(pairs) < 2:
        return [work(pr) for pr in pairs]
    with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(work, pairs, chunksize=4))


def _print_closed_form(cf, fmt: str) -> None:
    if fmt == "json":
        print(cf.to_json())
    else:
        print(cf.render())


def cmd_classify(args) -> int:
    cls = classify(args.N, args.p)
    ist = cls.structure
    if args.format == "json":
        print(json.dumps({
            "N": args.N, "p": args.p, "f": ist.f, "index": ist.e,
            "klein_four": ist.is_klein_four, "minus_one_in_p": ist.minus_one_in_p,
            "coset_reps": list(ist.coset_reps), "quadratic_subfields": list(ist.quad_discs),
            "form": cls.form_kind, "x": cls.x, "sqrt_pstar": cls.sqrt_pstar,
            "b": [str(b) for b in cls.b_values],
        }))
        return EXIT_OK
    shape = "non-cyclic" if ist.is_klein_four else "cyclic"
    head = f"index {ist.e}" + (f" {shape}" if ist.e == 4 else "")
    print(f"{head}, form {cls.form_kind}, f={ist.f}")
    print(f"  coset reps {list(ist.coset_reps)}, quadratic subfields Q(sqrt D) for D in {list(ist.quad_discs)}")
    print(f"  b = {[str(b) for b in cls.b_values]}, x = {cls.x}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    _print_closed_form(resolve(args.N, args.p), args.format)
    return EXIT_OK


def cmd_verify(args) -> int:
    cf = resolve(args.N, args.p)
    rep = verify(cf, budget=args.q_max)
    if args.format == "json":
        print(rep.to_json())
    else:
        print(cf.render())
        if rep.status.startswith("resolver-only"):
            print(f"warning: {rep.status} ({rep.message})")
        else:
            print(f"{rep.status}: {rep.message}; oracle {rep.oracle_value:.6f}")
    return EXIT_OK if rep.passed else EXIT_VERIFY


def cmd_sweep(args) -> int:
    cfg = SweepConfig(
        q_max=args.q_max,
        N_range=(args.N_min, args.N_max),
        p_range=(args.p_min, args.p_max),
        index_filter=args.index,
        output_path=args.out,
        format=args.format,
        jobs=args.jobs,
    )
    rows = run_sweep(cfg)
    counts: dict[str, int] = {}
    for row in rows:
        counts[row["status"]] = counts.get(row["status"], 0) + 1
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            for row in rows:
                fh.write(json.dumps(row) + "\n")
    if cfg.format == "json":
        print(json.dumps({"summary": counts, "cases": rows}))
    else:
        for row in rows:
            if row["status"] == "skipped":
                label = f"skipped: {row['reason']}"
            elif row["status"] == "pass":
                label = f"pass     {row['form']}"
            else:
                label = f"{row['status']}: {row.get('reason', row.get('message', ''))}"
            print(f"{row['N']:>4} {row['p']:>3}  {label}")
        print("summary: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())) if counts else "summary: 0 cases")
    bad = counts.get("fail", 0) + counts.get("error", 0)
    return EXIT_VERIFY if bad else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gauss-sign", description="Signs and unit roots of index 2 / 4 Gauss sums.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def pair(sp):
        sp.add_argument("--N", type=int, required=True)
        sp.add_argument("--p", type=int, required=True)
        sp.add_argument("--format", choices=("text", "json"), default="text")

    pair(sub.add_parser("classify", help="index structure and form kind"))
    pair(sub.add_parser("evaluate", help="resolved closed form"))
    sp = sub.add_parser("verify", help="check the closed form against a brute-force sum")
    pair(sp)
    sp.add_argument("--q-max", type=int, default=DEFAULT_BUDGET)
    sp = sub.add_parser("sweep", help="verify every supported pair in a range")
    sp.add_argument("--q-max", type=int, default=10**6)
    sp.add_argument("--N-min", type=int, default=5)
    sp.add_argument("--N-max", type=int, default=200)
    sp.add_argument("--p-min", type=int, default=3)
    sp.add_argument("--p-max", type=int, default=99)
    sp.add_argument("--index", choices=("2", "4", "both"), default="both")
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.add_argument("--out", default=None, help="write one JSON object per case")
    sp.add_argument("--jobs", type=int, default=1, help="worker processes")
    return parser


COMMANDS = {"classify": cmd_classify, "evaluate": cmd_evaluate, "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UnsupportedCase as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except InvalidInput as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GaussSignError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
