"""Command-line interface: ``freeprobe {norm,moments,walks,construct,verify}``.

JSON is the default output, CSV for series.  Every output starts with the
tool version and the resolved configuration, and contains nothing
time-dependent, so identical arguments give byte-identical output.

Exit codes: 0 success, 1 verification failure, 2 usage or input error,
3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys

from . import __version__, verify
from .characters import (
    Character,
    TableCharacter,
    delta_character,
    moment_series,
    trace_character,
)
from .constructions import (
    MAX_PAIR_CHECKS,
    ConstructionParams,
    build_Ci,
    build_Ci_prime,
    build_Cij,
    build_R0,
    build_Ri,
    build_Ri_sigma,
    build_script_Ci_k,
    phi_mass_report,
)
from .errors import InvalidInput, ResourceLimitError, WitnessNotFound
from .freegroup import parse_word
from .spectral import operator_norm
from .unitaries import UnitaryFamily
from .walks import walk_table

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NONCONVERGED = 0, 1, 2, 3
SETS = ("R_0", "C_i", "C_i_j", "C_i_prime", "R_i", "R_i_sigma", "script_C_i_k")

log = logging.getLogger("freeprobe")


class UsageError(Exception):
    pass


# -- argument parsing ------------------------------------------------------------

def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None


def _add_family_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--haar", type=_positive_int, metavar="D", help="sample N Haar unitaries of size D")
    src.add_argument("--unitaries", "--family", dest="unitaries", metavar="FILE",
                     help="unitary family JSON {N, d, matrices}")
    p.add_argument("--seed", type=int, default=0)


def _add_char_args(p: argparse.ArgumentParser, default: str) -> None:
    p.add_argument("--char", choices=("delta", "trace", "table"), default=default)
    p.add_argument("--table", metavar="FILE", help="table character JSON (with --char table)")
    _add_family_args(p)


def _add_construction_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--g0", default="1 2", help='cyclically reduced word of even length, e.g. "1 2" or "ab"')
    p.add_argument("--k0", type=int, default=None, help="default: max(4, least k0 with (2N-1)^-k0 <= alpha^2/4)")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--max-pairs", type=_positive_int, default=MAX_PAIR_CHECKS,
                   help="pair products examined for R_i before sampling")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="freeprobe", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"freeprobe {__version__}")
    parser.add_argument("--threads", type=_positive_int, default=None,
                        help="worker threads (default: $FREEPROBE_THREADS or 1)")
    parser.add_argument("-o", "--output", metavar="PATH", help="write to PATH instead of stdout")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", help="norm of sum u (x) conj(u) + h.c. on Hilbert-Schmidt space")
    p.add_argument("--rank", type=_positive_int, default=2)
    _add_family_args(p)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=_positive_int, default=5000)
    p.add_argument("--subspace", choices=("full", "traceless", "both"), default="both",
                   help="full space (norm is always 2N), traceless part, or both")

    p = sub.add_parser("moments", help="CSV of (2n, phi(a^2n), root)")
    p.add_argument("--rank", type=_positive_int, default=2)
    _add_char_args(p, "delta")
    p.add_argument("--max-n", type=_positive_int, default=10, help="rows for n = 1..MAX_N, i.e. 2n up to 2*MAX_N")
    p.add_argument("--method", choices=("auto", "walks", "spectral", "convolution"), default="auto")
    p.add_argument("--plot", metavar="PATH", help="also save a figure of the root column")

    p = sub.add_parser("walks", help="CSV of Catalan-triangle bounds against exact walk counts")
    p.add_argument("--rank", type=_positive_int, default=2)
    p.add_argument("--max-n", type=int, default=6)
    p.add_argument("--no-exact", action="store_true", help="skip the exact per-element counts")
    p.add_argument("--plot", metavar="PATH")

    p = sub.add_parser("construct", help="build word sets and report their phi-mass")
    p.add_argument("--rank", type=_positive_int, default=2)
    _add_construction_args(p)
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--j", type=int, default=1, help="period parameter for C_i_j")
    p.add_argument("--k", type=int, default=None, help="half length for script_C_i_k (default 2i)")
    p.add_argument("--set", dest="sets", action="append", choices=SETS,
                   help="set to report; repeatable (default: C_i, C_i_prime, R_i, R_i_sigma)")
    _add_char_args(p, "trace")
    p.add_argument("--plot", metavar="PATH", help="also save the length histograms")

    p = sub.add_parser("verify", help="run a named verification suite")
    p.add_argument("--lemma", required=True, help=", ".join(verify.LEMMAS))
    p.add_argument("--rank", type=_positive_int, default=2)
    _add_construction_args(p)
    p.add_argument("--i", type=int, default=5)
    p.add_argument("--i2", type=int, default=9)
    p.add_argument("--k", type=int, default=18)
    p.add_argument("--i-values", type=_int_list, default=None, help='e.g. "5 6 7"; default: --i alone')
    p.add_argument("--trials", type=_positive_int, default=10_000)
    p.add_argument("--max-len", type=_positive_int, default=12)
    p.add_argument("--max-n", type=int, default=12)
    p.add_argument("--samples", type=_positive_int, default=50)
    p.add_argument("--seed", type=int, default=0)
    return parser


# -- helpers -------------------------------------------------------------------

def resolve_threads(arg: int | None) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("FREEPROBE_THREADS")
    if env is None or env == "":
        return 1
    try:
        return _positive_int(env)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"FREEPROBE_THREADS: {exc}") from None


def resolved_config(args: argparse.Namespace, threads: int) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("output", "verbose", "threads")}
    cfg["threads"] = threads
    return cfg


def load_family(args, rank: int | None = None) -> UnitaryFamily:
    if args.unitaries:
        fam = UnitaryFamily.load(args.unitaries)
        if rank is not None and fam.rank != rank:
            raise InvalidInput(f"--rank {rank} but the family has N={fam.rank}")
        return fam
    if args.haar:
        return UnitaryFamily.haar(args.haar, rank or 2, seed=args.seed)
    raise UsageError("need --haar D or --unitaries FILE")


def load_character(args) -> Character:
    if args.char == "delta":
        return delta_character(args.rank)
    if args.char == "trace":
        return trace_character(load_family(args, args.rank))
    if not args.table:
        raise UsageError("--char table needs --table FILE")
    phi = TableCharacter.load(args.table)
    if phi.rank != args.rank:
        raise InvalidInput(f"--rank {args.rank} but the table is for N={phi.rank}")
    return phi


def construction_params(args) -> ConstructionParams:
    return ConstructionParams(parse_word(args.g0), args.rank, k0=args.k0, alpha=args.alpha)


def _json_default(obj):
    if hasattr(obj, "item"):
        return obj.item()
    if isinstance(obj, (set, frozenset, tuple)):
        return list(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def emit_json(payload: dict, config: dict) -> str:
    doc = {"tool": "freeprobe", "version": __version__, "config": config, **payload}
    return json.dumps(doc, indent=2, default=_json_default) + "\n"


def emit_csv(header: list[str], rows: list[list], config: dict) -> str:
    buf = io.StringIO()
    buf.write(f"# freeprobe {__version__}\n")
    buf.write(f"# config {json.dumps(config, default=_json_default)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(["" if v is None else v for v in row] for row in rows)
    return buf.getvalue()


# -- subcommands ----------------------------------------------------------------

def cmd_norm(args, config) -> tuple[int, str]:
    fam = load_family(args, args.rank)
    subspaces = ("full", "traceless") if args.subspace == "both" else (args.subspace,)
    results = {s: operator_norm(fam, tol=args.tol, max_iter=args.max_iter, seed=args.seed, subspace=s)
               for s in subspaces}
    main = results[subspaces[0]]
    payload = {
        "N": fam.rank,
        "d": fam.dim,
        **{k: v for k, v in main.as_dict().items()},
    }
    if len(subspaces) == 2:
        payload["traceless"] = results["traceless"].as_dict()
    converged = all(r.converged for r in results.values())
    return (EXIT_OK if converged else EXIT_NONCONVERGED), emit_json(payload, config)


def cmd_moments(args, config) -> tuple[int, str]:
    phi = load_character(args)
    rows = moment_series(phi, args.max_n, args.method)
    if args.plot:
        from .plotting import plot_moment_roots

        plot_moment_roots(rows, args.rank, args.plot, title=f"{args.char} character, N={args.rank}")
    return EXIT_OK, emit_csv(["2n", "moment", "root"], [list(r) for r in rows], config)


def cmd_walks(args, config) -> tuple[int, str]:
    if args.max_n < 0:
        raise InvalidInput(f"--max-n must be >= 0, got {args.max_n}")
    rows = walk_table(args.max_n, args.rank, exact=not args.no_exact)
    if args.plot:
        from .plotting import plot_walk_ratios

        plot_walk_ratios(rows, args.plot, title=f"N={args.rank}")
    header = ["n", "k", "C_nk", "N_nk", "exact_count"]
    return EXIT_OK, emit_csv(header, [[r[h] for h in header] for r in rows], config)


def _build_set(params, label, args, cache):
    i = args.i
    if label == "R_0":
        return build_R0(params)
    if "C_i" not in cache:
        cache["C_i"] = build_Ci(params, i)
    if label == "C_i":
        return cache["C_i"]
    if label == "C_i_j":
        return build_Cij(params, i, args.j, ci=cache["C_i"])
    if "C_i_prime" not in cache:
        cache["C_i_prime"] = build_Ci_prime(params, i, ci=cache["C_i"])
    if label == "C_i_prime":
        return cache["C_i_prime"]
    if "R_i" not in cache:
        cache["R_i"] = build_Ri(params, i, cache["C_i_prime"], max_pairs=args.max_pairs, seed=args.seed)
    if label == "R_i":
        return cache["R_i"]
    if "R_i_sigma" not in cache:
        cache["R_i_sigma"] = build_Ri_sigma(params, i, cache["R_i"])
    if label == "R_i_sigma":
        return cache["R_i_sigma"]
    return build_script_Ci_k(params, i, args.k if args.k is not None else 2 * i, cache["R_i_sigma"])


def cmd_construct(args, config) -> tuple[int, str]:
    params = construction_params(args)
    phi = load_character(args)
    labels = args.sets or ["C_i", "C_i_prime", "R_i", "R_i_sigma"]
    cache: dict = {}
    reports = [phi_mass_report(phi, _build_set(params, label, args, cache), params).as_dict() for label in labels]
    if args.plot:
        from .plotting import plot_length_histograms

        plot_length_histograms(reports, args.plot, title=f"i={args.i}")
    return EXIT_OK, emit_json({"params": params.as_dict(), "reports": reports}, config)


def cmd_verify(args, config) -> tuple[int, str]:
    lemma = args.lemma
    if lemma not in verify.LEMMAS:
        raise UsageError(f"unknown lemma {lemma!r}; choose from {', '.join(verify.LEMMAS)}")
    if lemma in ("cardinality", "rootwindow", "sigma-distinct", "disjoint"):
        params = construction_params(args)
        i_values = args.i_values or [args.i]
        if lemma == "cardinality":
            rep = verify.verify_cardinality(params, i_values)
        elif lemma == "rootwindow":
            rep = verify.verify_rootwindow(params, i_values, args.max_pairs, args.seed)
        elif lemma == "sigma-distinct":
            rep = verify.verify_sigma_distinct(params, i_values, args.max_pairs, args.seed)
        else:
            rep = verify.verify_disjoint(params, args.i, args.i2, args.k, args.max_pairs, args.seed)
    elif lemma == "circular":
        rep = verify.verify_circular(args.trials, args.max_len, args.seed, args.rank)
    elif lemma in ("gram", "alphabeta"):
        fn = verify.verify_gram if lemma == "gram" else verify.verify_alphabeta
        rep = fn(samples=args.samples, seed=args.seed, rank=args.rank, threads=config["threads"])
    else:
        rep = verify.verify_catalan(max_n=args.max_n)
    return (EXIT_OK if rep.passed else EXIT_FAIL), emit_json(rep.as_dict(), config)


COMMANDS = {
    "norm": cmd_norm,
    "moments": cmd_moments,
    "walks": cmd_walks,
    "construct": cmd_construct,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        threads = resolve_threads(args.threads)
        config = resolved_config(args, threads)
        code, text = COMMANDS[args.command](args, config)
    except (UsageError, InvalidInput, ResourceLimitError) as exc:
        print(f"freeprobe: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WitnessNotFound as exc:
        print(f"freeprobe: verification failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
