"""Command-line harness for bounds, constructions, optimization runs and suites.

Settings resolve in the order: command-line flag, then ``--config`` file
(plain ``key = value`` lines), then ``MAXENT_*`` environment variables, then
built-in defaults.  Exit codes: 0 success or clean verification, 1 a
verification suite found violations (or a strict-conjecture sweep saw a
positive gap), 2 usage error, 3 domain error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import suites
from .bounds import conjectured_inputs, entropy_lower_bound
from .errors import MaxentsumError
from .optimize import OptimizerConfig, multistart_maximize, restricted_maximize
from .pmf import sum_distribution, write_pmf

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_IO = 4

CSV_HEADER = (
    "n,r,bound_bits,numeric_max_bits,gap,proven_case,"
    "starts_used,converged_fraction,wall_time_ms"
)

SUITE_NAMES = ("ulc", "identity", "sign", "preserve", "decomposition")


class _UsageError(Exception):
    pass


def proven_case(n: int, r: int) -> bool:
    """Whether equality of bound and maximum is a theorem for this cell."""
    return n == 1 or r == 1 or n == 2 or (n, r) == (3, 2)


def _human(x: float) -> str:
    return f"{float(x):.12g}"


def _full(x: float) -> str:
    return repr(float(x))


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _load_config(path: str) -> dict[str, str]:
    settings: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise _UsageError(f"{path}:{lineno}: expected 'key = value', got {raw.rstrip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            settings[key] = value
    return settings


class _Settings:
    """Flag > config file > MAXENT_* environment > default."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        path = getattr(args, "config", None)
        try:
            self.config = _load_config(path) if path else {}
        except OSError as exc:
            raise _UsageError(f"cannot read config file: {exc}") from exc

    def get(self, name: str, cast, default=None, required: bool = False):
        value = getattr(self.args, name.replace("-", "_"), None)
        if value is None and name in self.config:
            value = self._cast(cast, self.config[name], f"config key '{name}'")
        if value is None:
            env_name = "MAXENT_" + name.upper().replace("-", "_")
            raw = os.environ.get(env_name)
            if raw is not None:
                value = self._cast(cast, raw, env_name)
        if value is None:
            value = default
        if required and value is None:
            raise _UsageError(f"missing required setting --{name}")
        return value

    @staticmethod
    def _cast(cast, raw: str, origin: str):
        try:
            return _parse_bool(raw) if cast is bool else cast(raw)
        except ValueError as exc:
            raise _UsageError(f"bad value for {origin}: {raw!r}") from exc


def _print_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2))


def _cmd_bound(args: argparse.Namespace) -> int:
    cfg = _Settings(args)
    n = cfg.get("n", int, required=True)
    r = cfg.get("r", int, required=True)
    report = entropy_lower_bound(n, r)
    if cfg.get("json", bool, default=False):
        _print_json(report.as_dict())
    else:
        print(f"n = {report.n}")
        print(f"r = {report.r}")
        print(f"special_case = {report.special_case}")
        print(f"w0 = {_human(report.w0)}")
        print(f"bound_bits = {_human(report.bound_bits)}")
        print(f"binomial_term = {_human(report.terms.binomial_term)}")
        print(f"shifted_term = {_human(report.terms.shifted_term)}")
        print(f"weight_entropy = {_human(report.terms.weight_entropy)}")
    return EXIT_OK


def _cmd_construct(args: argparse.Namespace) -> int:
    cfg = _Settings(args)
    n = cfg.get("n", int, required=True)
    r = cfg.get("r", int, required=True)
    out_dir = cfg.get("out", str, required=True)
    inputs = conjectured_inputs(n, r)
    total = sum_distribution(inputs)
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for i, pmf in enumerate(inputs, start=1):
        path = os.path.join(out_dir, f"input_{i:02d}.pmf")
        write_pmf(pmf, path)
        paths.append(path)
    sum_path = os.path.join(out_dir, "sum.pmf")
    write_pmf(total, sum_path)
    paths.append(sum_path)
    for path in paths:
        print(path)
    return EXIT_OK


def _optimizer_config(cfg: _Settings) -> OptimizerConfig:
    return OptimizerConfig(
        starts=cfg.get("starts", int, default=64),
        seed=cfg.get("seed", int, default=0),
        outer_tol=cfg.get("tol", float, default=1e-12),
    )


def _cmd_optimize(args: argparse.Namespace) -> int:
    cfg = _Settings(args)
    n = cfg.get("n", int, required=True)
    r = cfg.get("r", int, required=True)
    ell = cfg.get("ell", int)
    oc = _optimizer_config(cfg)
    if ell is None:
        result = multistart_maximize(n, r, oc)
    else:
        result = restricted_maximize(n, r, ell, oc)
    bound = entropy_lower_bound(n, r).bound_bits
    if cfg.get("json", bool, default=False):
        payload = result.as_dict()
        payload.update({"n": n, "r": r, "ell": ell, "bound_bits": float(bound)})
        _print_json(payload)
    else:
        scope = f"n = {n}, r = {r}" + (f", ell = {ell}" if ell is not None else "")
        print(scope)
        print(f"best_value = {_human(result.best_value)}")
        print(f"bound_bits = {_human(bound)}")
        print(f"gap = {_human(result.gap_to_bound)}")
        print(f"starts = {len(result.per_start)}")
        print(f"converged_fraction = {_human(result.converged_fraction())}")
        print(f"distinct_local_optima = {len(result.distinct_local_values())}")
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _Settings(args)
    n_max = cfg.get("n-max", int, required=True)
    r_max = cfg.get("r-max", int, required=True)
    if n_max < 1 or r_max < 1:
        raise _UsageError("--n-max and --r-max must be >= 1")
    gap_tol = cfg.get("tol", float, default=1e-6)
    no_timing = cfg.get("no-timing", bool, default=False)
    strict = cfg.get("strict-conjecture", bool, default=False)
    oc = _optimizer_config(cfg)

    lines = [CSV_HEADER]
    cells = []
    for n in range(1, n_max + 1):
        for r in range(1, r_max + 1):
            t0 = time.perf_counter()
            result = multistart_maximize(n, r, oc)
            wall_ms = 0.0 if no_timing else (time.perf_counter() - t0) * 1000.0
            bound = entropy_lower_bound(n, r).bound_bits
            gap = result.gap_to_bound
            proven = proven_case(n, r)
            cells.append((n, r, gap, proven))
            lines.append(
                ",".join(
                    (
                        str(n),
                        str(r),
                        _full(bound),
                        _full(result.best_value),
                        _full(gap),
                        "true" if proven else "false",
                        str(len(result.per_start)),
                        _full(result.converged_fraction()),
                        _full(wall_ms),
                    )
                )
            )
    body = "\n".join(lines) + "\n"

    out_path = cfg.get("out", str)
    if out_path:
        with open(out_path, "w", encoding="ascii") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)

    proven_gaps = [abs(g) for _, _, g, p in cells if p]
    open_cells = [(n, r, g) for n, r, g, p in cells if not p]
    positive = [(n, r, g) for n, r, g in open_cells if g > gap_tol]
    summary = (
        f"summary: proven cells {len(proven_gaps)}, max |gap| "
        f"{max(proven_gaps) if proven_gaps else 0.0:.3e}; open cells {len(open_cells)}, "
        f"gaps > +{gap_tol:g}: {len(positive)}"
    )
    print(summary, file=sys.stderr)
    for n, r, g in positive:
        print(
            f"POTENTIAL COUNTEREXAMPLE: (n={n}, r={r}) gap={g:+.6e} exceeds {gap_tol:g}",
            file=sys.stderr,
        )
    if strict and any(g > gap_tol for _, _, g, _ in cells):
        return EXIT_VIOLATIONS
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    cfg = _Settings(args)
    suite = args.suite
    trials = cfg.get("trials", int, default=10_000)
    seed = cfg.get("seed", int, default=0)
    if suite == "ulc":
        report = suites.ulc_suite(
            cfg.get("n", int, default=2), cfg.get("r", int, default=2), trials, seed
        )
    elif suite == "identity":
        report = suites.identity_suite(trials, seed)
    elif suite == "sign":
        report = suites.sign_suite(trials, seed)
    elif suite == "preserve":
        report = suites.preserve_suite(trials, seed)
    else:
        report = suites.decomposition_suite(trials, seed, r=cfg.get("r", int))
    print(f"suite = {report.suite}")
    print(f"trials = {report.trials}")
    print(f"seed = {report.seed}")
    print(f"violations = {len(report.violations)}")
    for key, value in sorted(report.stats.items()):
        rendered = _human(value) if isinstance(value, float) else value
        print(f"{key} = {rendered}")
    out_path = cfg.get("out", str)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            json.dump(report.as_dict(), fh, indent=2)
            fh.write("\n")
        print(f"report written to {out_path}")
    elif report.violations:
        for witness in report.violations[:5]:
            print(json.dumps(witness))
    return EXIT_OK if report.passed else EXIT_VIOLATIONS


def _cmd_identity(args: argparse.Namespace) -> int:
    cfg = _Settings(args)
    trials = cfg.get("trials", int, default=10_000)
    seed = cfg.get("seed", int, default=0)
    report = suites.identity_suite(trials, seed)
    if cfg.get("json", bool, default=False):
        _print_json(report.as_dict())
    else:
        print(f"trials = {report.trials}")
        print(f"violations = {len(report.violations)}")
        print(f"max_relative_gap = {_human(report.stats['max_relative_gap'])}")
        print(f"min_even_expansion = {_human(report.stats['min_even_expansion'])}")
    return EXIT_OK if report.passed else EXIT_VIOLATIONS


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value settings file")
    common.add_argument("--n", type=int, default=None, help="number of summands")
    common.add_argument("--r", type=int, default=None, help="variables take values in {0, ..., r}")
    common.add_argument("--seed", type=int, default=None, help="deterministic master seed")
    common.add_argument("--starts", type=int, default=None, help="random optimizer starts")
    common.add_argument("--tol", type=float, default=None, help="tolerance (command specific)")
    common.add_argument("--trials", type=int, default=None, help="Monte Carlo trials")
    common.add_argument("--out", default=None, help="output path (command specific)")
    common.add_argument("--json", action="store_const", const=True, default=None,
                        help="machine-readable output")
    common.add_argument("--no-timing", dest="no_timing", action="store_const", const=True,
                        default=None, help="zero out wall-time columns for byte-stable output")

    parser = argparse.ArgumentParser(
        prog="maxentsum",
        description="Bounds, constructions and numerical maximization for the "
                    "entropy of sums of independent variables on {0, ..., r}.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", parents=[common], help="print the closed-form lower bound")
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("construct", parents=[common],
                       help="write the conjectured optimal inputs and their sum as pmf files")
    p.set_defaults(func=_cmd_construct)

    p = sub.add_parser("optimize", parents=[common], help="multistart block-ascent maximization")
    p.add_argument("--ell", type=int, default=None,
                   help="restrict blocks ell+1..n to the two-point support {0, r}")
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("sweep", parents=[common],
                       help="CSV of bound vs numeric maximum over a (n, r) grid")
    p.add_argument("--n-max", dest="n_max", type=int, default=None)
    p.add_argument("--r-max", dest="r_max", type=int, default=None)
    p.add_argument("--strict-conjecture", dest="strict_conjecture", action="store_const",
                   const=True, default=None,
                   help="exit 1 when any gap exceeds the tolerance")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("verify", parents=[common], help="run a Monte Carlo verification suite")
    p.add_argument("--suite", choices=SUITE_NAMES, required=True)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("identity", parents=[common],
                       help="certificate identity agreement on random product triples")
    p.set_defaults(func=_cmd_identity)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MaxentsumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
