"""Command-line front end.

Exit codes are the machine contract: 0 = YES / HOLDS / SAT / verified,
1 = NO / FAILS / UNSAT / rejected, 3 = UNKNOWN, 2 = usage or input error.
Every flag can also be given through an environment variable named
``DIAGBISIM_<FLAG>`` (for example ``DIAGBISIM_SEED``); flags win.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import bisim, etim, logic
from .diagram import BisimWitness, bisimulation_defects, load_diagram, load_witness
from .encodings import encode_lts, load_lts, word_kernel
from .errors import DiagBisimError
from .matrix import RatMatrix

ENV_PREFIX = "DIAGBISIM_"

EXIT_YES = 0
EXIT_NO = 1
EXIT_ERROR = 2
EXIT_UNKNOWN = 3


@dataclass(frozen=True)
class RunConfig:
    mode: str = "auto"
    seed: int | None = None
    trials: int = 64
    grid_limit: int = 2**20
    exhaustive_q: bool = False
    incremental_prune: bool = False

    def __post_init__(self):
        if self.mode not in ("auto", "deterministic", "randomized"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "randomized" and self.seed is None:
            raise ValueError("--seed is required with --mode randomized")
        if self.grid_limit < 1:
            raise ValueError("--grid-limit must be at least 1")
        if self.trials < 1:
            raise ValueError("--trials must be at least 1")

    def etim_mode(self) -> etim.Mode:
        if self.mode == "deterministic":
            # refuses with GridTooLarge (exit 2) beyond the limit
            return etim.Deterministic(grid_limit=self.grid_limit)
        if self.mode == "randomized":
            return etim.Randomized(self.seed, self.trials)
        return etim.Auto(seed=self.seed or 0, trials=self.trials, grid_limit=self.grid_limit)


def _env(name: str, default=None):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), default)


def _env_bool(name: str) -> bool:
    return str(_env(name, "")).lower() in ("1", "true", "yes", "on")


def _env_int(name: str, default):
    raw = _env(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"error: {ENV_PREFIX}{name.upper().replace('-', '_')} must be an integer")


def _config_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("solver configuration")
    g.add_argument("--mode", choices=["auto", "deterministic", "randomized"], default=_env("mode", "auto"))
    g.add_argument("--seed", type=int, default=_env_int("seed", None))
    g.add_argument("--trials", type=int, default=_env_int("trials", 64))
    g.add_argument("--grid-limit", type=int, default=_env_int("grid-limit", 2**20))
    g.add_argument("--exhaustive-q", action="store_true", default=_env_bool("exhaustive-q"))
    g.add_argument("--prune", action="store_true", default=_env_bool("prune"))
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diagbisim",
        description="Bisimilarity, model checking and invertible-matrix solving for finitary diagrams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    cfg = _config_parent()

    p = sub.add_parser("check-bisim", parents=[cfg], help="decide bisimilarity of two diagrams")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--witness", default=_env("witness"), help="write the verified witness here")
    p.add_argument("--lts", action="store_true", default=_env_bool("lts"),
                   help="inputs are transition systems, compared through their run diagrams")

    p = sub.add_parser("model-check", parents=[cfg], help="check a positive formula at an object")
    p.add_argument("diagram")
    p.add_argument("--object", required=_env("object") is None, default=_env("object"))
    src = p.add_mutually_exclusive_group()
    src.add_argument("--formula", default=_env("formula"))
    src.add_argument("--formula-file", default=_env("formula-file"))

    p = sub.add_parser("solve-etim", parents=[cfg], help="decide an invertible-matrix formula")
    p.add_argument("file")
    p.add_argument("--smt-out", default=_env("smt-out"), help="also write the SMT-LIB encoding here")

    p = sub.add_parser("export-smt", help="write the QF_NRA encoding of an invertible-matrix formula")
    p.add_argument("file")
    p.add_argument("-o", "--out", default=_env("out"))

    p = sub.add_parser("encode-lts", help="write the run diagram of a transition system")
    p.add_argument("file")
    p.add_argument("-o", "--out", default=_env("out"))

    p = sub.add_parser("verify-bisim", help="check a witness file against two diagrams")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("witness")
    return parser


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _dump(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _config(args) -> RunConfig:
    return RunConfig(
        mode=args.mode,
        seed=args.seed,
        trials=args.trials,
        grid_limit=args.grid_limit,
        exhaustive_q=args.exhaustive_q,
        incremental_prune=args.prune,
    )


def _show_matrix(m: RatMatrix) -> str:
    if m.rows == 0 or m.cols == 0:
        return f"<{m.rows}x{m.cols}>"
    return "[" + "; ".join(" ".join(str(x) for x in m.row(i)) for i in range(m.rows)) + "]"


def cmd_check_bisim(args) -> int:
    config = _config(args)
    if args.lts:
        F = encode_lts(load_lts(_read(args.first)))
        G = encode_lts(load_lts(_read(args.second)))
        kernel = word_kernel()
    else:
        F = load_diagram(_read(args.first))
        G = load_diagram(_read(args.second))
        kernel = None
    verdict = bisim.check_bisimilar(
        F, G, kernel, config.etim_mode(),
        exhaustive=config.exhaustive_q, prune=config.incremental_prune,
    )
    print(verdict.status)
    if isinstance(verdict, bisim.Yes):
        print(f"witness: {len(verdict.witness)} triples")
        for t in verdict.witness:
            shown = "id" if t.matrix is None else _show_matrix(t.matrix)
            print(f"  ({t.c}, {shown}, {t.d})")
        if args.witness:
            _write(args.witness, _dump(verdict.witness.to_document()))
        return EXIT_YES
    return EXIT_UNKNOWN if isinstance(verdict, bisim.Unknown) else EXIT_NO


def cmd_model_check(args) -> int:
    config = _config(args)
    if args.formula is not None:
        text = args.formula
    elif args.formula_file is not None:
        text = _read(args.formula_file)
    else:
        raise DiagBisimError("one of --formula or --formula-file is required")
    F = load_diagram(_read(args.diagram))
    S = logic.parse_formula(text.strip())
    verdict = logic.model_check_positive(F, args.object, S, config.etim_mode(), eager=config.incremental_prune)
    print(verdict.status)
    print(f"formula: {logic.format_formula(S)}")
    if isinstance(verdict, logic.Holds):
        for name, m in verdict.witness.items():
            print(f"  {name} = {_show_matrix(m)}")
        return EXIT_YES
    return EXIT_UNKNOWN if isinstance(verdict, logic.Unknown) else EXIT_NO


def cmd_solve_etim(args) -> int:
    config = _config(args)
    phi = etim.load_etim(_read(args.file))
    if args.smt_out:
        _write(args.smt_out, etim.export_smt(phi))
    verdict = etim.decide(phi, config.etim_mode())
    print(verdict.status)
    if isinstance(verdict, etim.Sat):
        for name, m in verdict.witness.items():
            print(f"  {name} = {_show_matrix(m)}")
        return EXIT_YES
    if isinstance(verdict, etim.Unknown):
        print(f"no invertible point found in {verdict.trials} trials")
        return EXIT_UNKNOWN
    return EXIT_NO


def cmd_export_smt(args) -> int:
    _write(args.out, etim.export_smt(etim.load_etim(_read(args.file))))
    return EXIT_YES


def cmd_encode_lts(args) -> int:
    _write(args.out, _dump(encode_lts(load_lts(_read(args.file))).to_document()))
    return EXIT_YES


def cmd_verify_bisim(args) -> int:
    F = load_diagram(_read(args.first))
    G = load_diagram(_read(args.second))
    W: BisimWitness = load_witness(_read(args.witness), F, G)
    defects = bisimulation_defects(F, G, W)
    if defects:
        print("REJECTED")
        for d in defects:
            print(f"  {d}")
        return EXIT_NO
    print("VERIFIED")
    return EXIT_YES


COMMANDS = {
    "check-bisim": cmd_check_bisim,
    "model-check": cmd_model_check,
    "solve-etim": cmd_solve_etim,
    "export-smt": cmd_export_smt,
    "encode-lts": cmd_encode_lts,
    "verify-bisim": cmd_verify_bisim,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (DiagBisimError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
