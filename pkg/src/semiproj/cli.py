"""Command-line entry point.

Subcommands ``harmonic``, ``schrodinger``, ``sweep``, ``audit`` and
``transform``.  Exit status: 0 when every asserted check passes, 1 when an
asserted check fails or a run aborts, 2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import experiments, io

log = logging.getLogger("semiproj")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
OUTPUT_ENV = "SRL_OUTPUT_DIR"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", help=f"output directory (fallback: ${OUTPUT_ENV}, then cwd)")
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("--threads", type=int, default=None, help="worker thread cap")

    p = _Parser(prog="semiproj", description="Semiclassical regularity of projection operators.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    h = sub.add_parser("harmonic", parents=[common], help="harmonic-oscillator gradient laws")
    h.add_argument("--config", help="TOML config (optional)")
    h.add_argument("--n", type=int, nargs="+", help="levels to sweep")

    s = sub.add_parser("schrodinger", parents=[common], help="Weyl-law and Husimi sweep")
    s.add_argument("--config", required=True)

    sw = sub.add_parser("sweep", parents=[common], help="family sweep plus configured trends")
    sw.add_argument("--config", required=True)

    a = sub.add_parser("audit", parents=[common], help="inequality audit on one projector")
    a.add_argument("--config", required=True)
    a.add_argument("--n", type=int, default=16, help="harmonic level")
    a.add_argument("--hbar", type=float, default=0.05, help="Schrodinger hbar")

    t = sub.add_parser("transform", parents=[common], help="single-shot phase-space transform")
    mode = t.add_mutually_exclusive_group(required=True)
    mode.add_argument("--wigner", action="store_true")
    mode.add_argument("--husimi", action="store_true")
    mode.add_argument("--weyl", action="store_true", help="binary phase field -> operator dump")
    t.add_argument("--input", required=True)
    t.add_argument("--output", help="output file name (default derived from input)")
    t.add_argument("--format", choices=("csv", "bin"), default="csv")
    return p


def load_config(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"config {path} does not parse: {exc}") from None


def resolve_output_dir(arg: str | None, cfg: dict | None = None) -> Path:
    cand = arg or (cfg or {}).get("output", {}).get("dir") or os.environ.get(OUTPUT_ENV) or "."
    out = Path(cand)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with tempfile.TemporaryFile(dir=out):
            pass
    except OSError as exc:
        raise UsageError(f"output directory {out} is not writable: {exc}") from None
    return out


def _sweep_config(cfg: dict, args, family: str | None = None) -> experiments.SweepConfig:
    cfg = dict(cfg)
    if args.threads is not None:
        cfg["threads"] = args.threads
    if getattr(args, "n", None) and family == "harmonic":
        cfg.setdefault("sweep", {})
        cfg["sweep"] = {**cfg["sweep"], "n": args.n}
    try:
        return experiments.SweepConfig.from_dict(cfg, family)
    except experiments.ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid config value: {exc}") from None


def _report(results, outdir: Path, threads: int) -> int:
    ok = True
    stamp = io.timestamp()
    for res in results:
        res.meta["threads"] = threads
        csv_path, json_path = res.write(outdir, stamp)
        for v in res.verdicts:
            print(v.line())
        print(f"wrote {csv_path} and {json_path.name}")
        ok = ok and res.ok
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_family(args, family: str | None):
    cfg = load_config(args.config) if args.config else {}
    if family is None and "family" not in cfg:
        raise experiments.ConfigError("family", "missing")
    sc = _sweep_config(cfg, args, family)
    outdir = resolve_output_dir(args.output_dir, cfg)
    if family == "harmonic":
        results = [experiments.harmonic_sweep(sc)]
        results += [experiments.regularity_trend(sc, *t) for t in sc.trends]
    elif family == "schrodinger":
        results = [experiments.weyl_law_sweep(sc)]
        results += [experiments.regularity_trend(sc, *t) for t in sc.trends]
    else:
        results = experiments.run_sweep(sc)
    return _report(results, outdir, sc.threads)


def _cmd_audit(args):
    cfg = load_config(args.config)
    sc = _sweep_config(cfg, args)
    outdir = resolve_output_dir(args.output_dir, cfg)
    res = experiments.audit_family(sc, n=args.n, hbar=args.hbar)
    return _report([res], outdir, sc.threads)


def _cmd_transform(args):
    from . import phasespace

    src = Path(args.input)
    if not src.is_file():
        raise UsageError(f"input file not found: {src}")
    outdir = resolve_output_dir(args.output_dir)
    try:
        if args.weyl:
            obj = phasespace.weyl_quantize(io.read_phase_field_bin(src))
            name = args.output or src.stem + "_weyl.bin"
            io.write_operator_bin(obj, outdir / name)
        else:
            op = io.read_operator_bin(src)
            field = phasespace.wigner(op) if args.wigner else phasespace.husimi(op)
            kind = "wigner" if args.wigner else "husimi"
            name = args.output or f"{src.stem}_{kind}.{args.format}"
            if args.format == "csv":
                io.write_phase_field_csv(field, outdir / name)
            else:
                io.write_phase_field_bin(field, outdir / name)
    except ValueError as exc:
        raise UsageError(f"cannot read {src}: {exc}") from None
    print(f"wrote {outdir / name}")
    return EXIT_OK


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                            format="%(levelname)s %(name)s: %(message)s")
        if args.threads is not None and args.threads < 1:
            raise UsageError("--threads must be >= 1")
        if args.command == "transform":
            return _cmd_transform(args)
        if args.command == "audit":
            return _cmd_audit(args)
        family = {"harmonic": "harmonic", "schrodinger": "schrodinger"}.get(args.command)
        return _cmd_family(args, family)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except experiments.ConfigError as exc:
        print(f"config error: {exc} (key '{exc.key}')", file=sys.stderr)
        return EXIT_USAGE
    except (MemoryError, RuntimeError, ValueError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
