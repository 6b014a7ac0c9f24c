"""Command-line entry point: ``shiftarc <command> ...``.

Exit codes: 0 success / property holds, 1 property fails (witness printed),
2 invalid input, 3 internal consistency violation, 4 non-convergence.

Every output embeds the hash of a run manifest (all parameters plus content
hashes of the input files), and the manifest itself is written next to the
output as ``<output>.manifest.json``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

from . import __version__
from .arc import (AdmissibilityViolation, TargetOutOfRange, arc_sweep, bisect_entropy,
                  parse_alpha_policy, parse_source, sample_generic, FileSource)
from .beta import PrecisionError
from .entropy import entropy_estimate
from .families import (BudgetExceeded, DEFAULT_BUDGET, bfree_characteristic, heredity_check,
                       load_spec, safe_symbol_check)
from .sequence import (DEFAULT_PRECISION, RotationCoding, as_fraction, format_window,
                       read_window, sturmian_window)
from .transport import dbar_ladder

log = logging.getLogger("shiftarc")

OUTDIR_ENV = "SHIFTARC_OUTDIR"
EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_INTERNAL, EXIT_NONCONVERGED = 0, 1, 2, 3, 4


class CommandError(Exception):
    def __init__(self, message, code=EXIT_INVALID):
        super().__init__(message)
        self.code = code


# --------------------------------------------------------------------------
# helpers


def fmt(x) -> str:
    return f"{float(x):.12g}"


def exact(x) -> str:
    q = Fraction(x)
    return f"{q.numerator}/{q.denominator}"


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def manifest_hash(manifest: dict) -> str:
    blob = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def output_path(args, default_name: str) -> Path:
    if args.output:
        return Path(args.output)
    outdir = args.outdir or os.environ.get(OUTDIR_ENV) or "."
    return Path(outdir) / default_name


def emit(args, default_name: str, text: str, manifest: dict) -> Path:
    path = output_path(args, default_name)
    atomic_write(path, text)
    atomic_write(path.with_name(path.name + ".manifest.json"),
                 json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return path


def base_manifest(args, command: str, **params) -> dict:
    m = {"tool": "shiftarc", "version": __version__, "command": command,
         "precision_bits": args.precision_bits}
    m.update(params)
    return m


def parse_grid(text: str) -> list:
    """``start:stop:step`` (inclusive of stop) or a comma-separated list."""
    if ":" in text:
        start, stop, step = (as_fraction(t) for t in text.split(":"))
        if step <= 0:
            raise CommandError("grid step must be positive")
        out, b = [], start
        while b <= stop:
            out.append(b)
            b += step
        return out
    return [as_fraction(t) for t in text.split(",")]


def parse_ints(text: str) -> list:
    return [int(t) for t in str(text).split(",") if t.strip()]


def load_input(path: str):
    if not Path(path).exists():
        raise CommandError(f"input file {path} not found")
    return read_window(path), file_digest(path)


# --------------------------------------------------------------------------
# commands


def cmd_gen(args) -> int:
    if bool(args.source) == bool(args.family):
        raise CommandError("give exactly one of --source or --family")
    if args.source:
        source = parse_source(args.source)
        if isinstance(source, FileSource):
            raise CommandError("gen does not read windows; use a sampling source")
        if args.seed is None:
            raise CommandError("--seed is required for sampling sources")
        if not args.n:
            raise CommandError("--n is required for sampling sources")
        w = sample_generic(source, args.n, args.seed)
        manifest = base_manifest(args, "gen", source=source.describe(), n=args.n, seed=args.seed)
    else:
        lo, hi = (int(t) for t in args.range.split(":")) if args.range else (0, args.n - 1)
        if args.family == "bfree":
            B = parse_ints(args.B)
            w = bfree_characteristic(B, lo, hi)
            manifest = base_manifest(args, "gen", family="bfree", B=B, range=[lo, hi])
        elif args.family == "sturmian":
            alpha = parse_alpha_policy(args.alpha, args.precision_bits)
            beta = as_fraction(args.beta)
            w = sturmian_window(RotationCoding(alpha, beta), lo, hi - lo + 1)
            manifest = base_manifest(args, "gen", family="sturmian", alpha=alpha.hex(),
                                     beta=exact(beta), range=[lo, hi])
        else:
            raise CommandError(f"unknown family {args.family!r}")
    h = manifest_hash(manifest)
    path = emit(args, "window.txt", format_window(w, [f"manifest={h}"]), manifest)
    log.info("wrote %d symbols to %s", len(w), path)
    return EXIT_OK


def cmd_arc(args) -> int:
    x, digest = load_input(args.x)
    alpha = parse_alpha_policy(args.alpha, args.precision_bits)
    betas = parse_grid(args.grid)
    spec = load_spec(args.spec) if args.spec else None
    manifest = base_manifest(args, "arc", x_sha256=digest, alpha=alpha.hex(),
                             grid=[exact(b) for b in betas], k=args.k, guard=args.guard,
                             spec=file_digest(args.spec) if args.spec else None)
    h = manifest_hash(manifest)
    try:
        samples = arc_sweep(x, alpha, betas, args.k, spec=spec, guard_factor=args.guard)
    except AdmissibilityViolation as exc:
        raise CommandError(str(exc), EXIT_INTERNAL) from exc
    rows = ["beta,beta_exact,entropy,dbar_to_x,dbar_to_x_exact,dbar_to_zero,dbar_to_zero_exact,manifest"]
    for s in samples:
        rows.append(",".join([fmt(s.beta), exact(s.beta), fmt(s.entropy),
                              fmt(s.dbar_to_x), exact(s.dbar_to_x),
                              fmt(s.dbar_to_zero), exact(s.dbar_to_zero), h]))
    emit(args, "arc.csv", "\n".join(rows) + "\n", manifest)
    return EXIT_OK


def cmd_bisect(args) -> int:
    x, digest = load_input(args.x)
    alpha = parse_alpha_policy(args.alpha, args.precision_bits)
    manifest = base_manifest(args, "bisect", x_sha256=digest, alpha=alpha.hex(),
                             target=args.target, tol=args.tol, k=args.k,
                             max_iter=args.max_iter, guard=args.guard)
    h = manifest_hash(manifest)
    res = bisect_entropy(x, alpha, args.target, args.tol, max_iter=args.max_iter, k=args.k,
                         guard_factor=args.guard)
    out = {"beta_star": exact(res.beta_star), "beta_star_float": float(res.beta_star),
           "achieved": res.achieved, "iterations": res.iterations,
           "converged": res.converged, "manifest": h}
    text = json.dumps(out, sort_keys=True, indent=2) + "\n"
    emit(args, "bisect.json", text, manifest)
    sys.stdout.write(text)
    return EXIT_OK if res.converged else EXIT_NONCONVERGED


def cmd_check(args) -> int:
    if not Path(args.spec).exists():
        raise CommandError(f"spec file {args.spec} not found")
    spec = load_spec(args.spec)
    if args.mode == "hereditary":
        verdict = heredity_check(spec, args.max_len, args.budget)
    elif args.mode.startswith("safe:"):
        verdict = safe_symbol_check(spec, int(args.mode[5:]), args.max_len, args.budget)
    else:
        raise CommandError(f"unknown mode {args.mode!r}")
    manifest = base_manifest(args, "check", spec_sha256=file_digest(args.spec),
                             max_len=args.max_len, mode=args.mode, budget=args.budget)
    out = verdict.to_dict()
    out["manifest"] = manifest_hash(manifest)
    text = json.dumps(out, sort_keys=True, indent=2) + "\n"
    if args.output or args.outdir or os.environ.get(OUTDIR_ENV):
        emit(args, "check.json", text, manifest)
    sys.stdout.write(text)
    return EXIT_OK if verdict.holds else EXIT_FAIL


def cmd_dbar(args) -> int:
    x, dx = load_input(args.x)
    y, dy = load_input(args.y)
    ks = parse_ints(args.ks)
    manifest = base_manifest(args, "dbar", x_sha256=dx, y_sha256=dy, ks=ks)
    h = manifest_hash(manifest)
    rows = ["k,cost,cost_exact,manifest"]
    for k, cost in dbar_ladder(x, y, ks):
        rows.append(f"{k},{fmt(cost)},{exact(cost)},{h}")
    emit(args, "dbar.csv", "\n".join(rows) + "\n", manifest)
    return EXIT_OK


def cmd_entropy(args) -> int:
    import math

    x, digest = load_input(args.x)
    prof = entropy_estimate(x, args.k, args.guard)
    unit = "bits" if args.bits else "nats"
    scale = 1 / math.log(2) if args.bits else 1.0
    manifest = base_manifest(args, "entropy", x_sha256=digest, k=args.k, guard=args.guard,
                             unit=unit, format=args.format)
    h = manifest_hash(manifest)
    if args.format == "json":
        out = {"method": prof.method, "guard_factor": prof.guard_factor,
               "window_length": prof.window_length, "unit": unit,
               "k": list(prof.k_values),
               "H_k": [v * scale for v in prof.block_entropies],
               "h_k": [v * scale for v in prof.conditional],
               "chosen_estimate": prof.chosen_estimate * scale, "manifest": h}
        text = json.dumps(out, sort_keys=True, indent=2) + "\n"
        emit(args, "entropy.json", text, manifest)
    else:
        rows = ["k,H_k,h_k,manifest"]
        rows += [f"{k},{fmt(H * scale)},{fmt(c * scale)},{h}"
                 for k, H, c in zip(prof.k_values, prof.block_entropies, prof.conditional)]
        emit(args, "entropy.csv", "\n".join(rows) + "\n", manifest)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> tuple[argparse.ArgumentParser, list]:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="64-bit seed for sampling commands")
    common.add_argument("-o", "--output", help="output file")
    common.add_argument("--outdir", help=f"output directory (default ${OUTDIR_ENV} or .)")
    common.add_argument("--n", type=int, help="window length N")
    common.add_argument("--precision-bits", type=int, default=DEFAULT_PRECISION,
                        help="fixed-point bits for alpha (>= 96)")
    common.add_argument("--config", help="JSON file supplying any option")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="shiftarc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="write a window file")
    p.add_argument("--source", help="bernoulli:P | markov:JSON | parry:JSON|golden")
    p.add_argument("--family", choices=["bfree", "sturmian"])
    p.add_argument("--B", help="comma-separated moduli for --family bfree")
    p.add_argument("--range", help="inclusive coordinate range lo:hi")
    p.add_argument("--alpha", default="default")
    p.add_argument("--beta", default="1/2")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("arc", parents=[common], help="sweep the masked arc")
    p.add_argument("x", help="window file")
    p.add_argument("--alpha", default="default",
                   help="default | explicit:VALUE | random:SEED | hex:0x.../2^P")
    p.add_argument("--grid", default="0:1:1/20")
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--guard", type=int, default=100)
    p.add_argument("--spec", help="family spec JSON for admissibility spot checks")
    p.set_defaults(func=cmd_arc)

    p = sub.add_parser("bisect", parents=[common], help="search the arc for an entropy")
    p.add_argument("x")
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--tol", type=float, default=0.02)
    p.add_argument("--alpha", default="default")
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--max-iter", type=int, default=20)
    p.add_argument("--guard", type=int, default=100)
    p.set_defaults(func=cmd_bisect)

    p = sub.add_parser("check", parents=[common], help="heredity / safe-symbol verdict")
    p.add_argument("spec")
    p.add_argument("--max-len", type=int, default=12)
    p.add_argument("--mode", default="hereditary", help="hereditary | safe:A")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("dbar", parents=[common], help="k-block d-bar ladder")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("--ks", default="1,2,4,8")
    p.set_defaults(func=cmd_dbar)

    p = sub.add_parser("entropy", parents=[common], help="block-entropy profile")
    p.add_argument("x")
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--guard", type=int, default=100)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--bits", action="store_true", help="report in bits")
    p.set_defaults(func=cmd_entropy)

    return parser, list(sub.choices.values())


def _config_defaults(argv) -> dict:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return {}
    with open(known.config) as fh:
        cfg = json.load(fh)
    return {k.replace("-", "_"): v for k, v in cfg.items()}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = build_parser()
    try:
        defaults = _config_defaults(argv)
    except (OSError, ValueError) as exc:
        print(f"shiftarc: bad config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    for p in subparsers:
        p.set_defaults(**defaults)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"shiftarc: {exc}", file=sys.stderr)
        return exc.code
    except TargetOutOfRange as exc:
        print(f"shiftarc: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, BudgetExceeded, PrecisionError, OSError, KeyError) as exc:
        print(f"shiftarc: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
