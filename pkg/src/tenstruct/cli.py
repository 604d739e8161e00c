"""Command-line front end.

    tenstruct classify  TENSOR.json [--tol EPS]
    tenstruct alpha     TENSOR.json [--op T|F] [--method grid|multistart] [--h H]
                                    [--starts S] [--iters I] [--seed SEED]
    tenstruct pcheck    TENSOR.json [same search flags as alpha]
    tenstruct eig       TENSOR.json [--kind H|Z] [--starts S] [--iters I] [--seed SEED] [--tol TOL]
    tenstruct subtensor TENSOR.json --indices 1,3 [--output OUT.json]
    tenstruct gen       --class B --m 3 --n 2 [--seed SEED] [--count K] [--scale S] --output DIR
    tenstruct gen       --spec GENSPEC.json --output DIR

Every verb accepts ``--format json|text`` and ``--output PATH``.  Search
verbs also take ``--config`` with a JSON object (inline or a file path)
whose keys are overridden by explicit flags.

Exit status: 0 success, 1 analysis failure (e.g. no eigenpair converged),
2 parse or validation error, 3 resource limit exceeded.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ParseError, ResourceLimit, TenstructError
from .generators import CLASSES, GenSpec, corpus_filename, generate
from .p_analysis import AlphaConfig, alpha_estimate, p_classify
from .spectral import EigenConfig, definiteness_check, h_eigenpairs, symmetrized_input, z_eigenpairs
from .structure_checks import Tolerance, b_classify, classify
from .tensor_core import from_json_dict, principal_subtensor, to_json_dict

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_RESOURCE = 0, 1, 2, 3


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(doc) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip floats."""
    return json.dumps(doc, sort_keys=True, indent=2, default=_jsonable, allow_nan=False) + "\n"


def load_json(path: str):
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    text = p.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def load_tensor(path: str):
    doc = load_json(path)
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be an object with 'order', 'dim', 'entries'")
    return from_json_dict(doc)


def _config_doc(raw: str | None) -> dict:
    if raw is None:
        return {}
    doc = load_json(raw) if Path(raw).is_file() else None
    if doc is None:
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"--config: column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError("--config must be a JSON object")
    return doc


def _alpha_config(args) -> AlphaConfig:
    doc = _config_doc(args.config)
    for key in ("method", "h", "starts", "iters", "seed"):
        val = getattr(args, key)
        if val is not None:
            doc[key] = val
    try:
        return AlphaConfig.from_dict(doc)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"config: {exc}") from None


def _eigen_config(args) -> EigenConfig:
    doc = _config_doc(args.config)
    for key in ("starts", "iters", "seed", "tol"):
        val = getattr(args, key)
        if val is not None:
            doc[key] = val
    try:
        return EigenConfig(**doc)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"config: {exc}") from None


# -- verbs ---------------------------------------------------------------------

def cmd_classify(args):
    A = load_tensor(args.input)
    tol = Tolerance(args.tol or 0.0)
    report = classify(A, tol).to_dict()
    bv = b_classify(A, tol)
    report["b_verdict"] = bv.verdict
    report["b_violation"] = bv.violation
    return {"tol": tol.eps}, report


def cmd_alpha(args):
    A = load_tensor(args.input)
    cfg = _alpha_config(args)
    est = alpha_estimate(A, args.op, cfg)
    return {"op": args.op, **cfg.to_dict()}, est.to_dict()


def cmd_pcheck(args):
    A = load_tensor(args.input)
    cfg = _alpha_config(args)
    return cfg.to_dict(), p_classify(A, cfg).to_dict()


def cmd_eig(args):
    A = load_tensor(args.input)
    cfg = _eigen_config(args)
    find = h_eigenpairs if args.kind == "H" else z_eigenpairs
    pairs = find(A, cfg)
    result = {"pairs": [p.to_dict() for p in pairs], "symmetrized": symmetrized_input(A)}
    result["definiteness"] = definiteness_check(A, cfg).to_dict()
    return {"kind": args.kind, **cfg.to_dict()}, result


def _parse_indices(raw: str) -> list[int]:
    try:
        J = [int(tok) for tok in raw.replace(" ", "").split(",") if tok]
    except ValueError:
        raise ParseError(f"--indices: expected comma-separated integers, got {raw!r}") from None
    return J


def cmd_subtensor(args):
    A = load_tensor(args.input)
    J = _parse_indices(args.indices)
    if any(j < 1 for j in J):
        from .errors import IndexOutOfRange

        raise IndexOutOfRange(f"--indices are one-based, got {J}")
    sub = principal_subtensor(A, [j - 1 for j in J])
    return None, to_json_dict(sub)


def cmd_gen(args):
    if args.spec:
        doc = load_json(args.spec)
        if not isinstance(doc, dict):
            raise ParseError(f"{args.spec}: GenSpec must be a JSON object")
        for key, flag in (("class", "cls"), ("m", "m"), ("n", "n"), ("seed", "seed"), ("scale", "scale")):
            if getattr(args, flag) is not None:
                doc[key] = getattr(args, flag)
    else:
        if args.cls is None or args.m is None or args.n is None:
            raise ParseError("gen needs --class, --m and --n (or --spec)")
        doc = {"class": args.cls, "m": args.m, "n": args.n,
               "seed": args.seed or 0, "scale": 1.0 if args.scale is None else args.scale}
    try:
        base = GenSpec.from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"GenSpec: {exc}") from None
    if args.count < 1:
        raise ParseError("--count must be >= 1")
    if not args.output:
        raise ParseError("gen needs --output DIR")
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for k in range(args.count):
        spec = GenSpec(base.m, base.n, base.cls, base.seed + k, base.scale)
        name = corpus_filename(spec)
        (out / name).write_text(dumps(to_json_dict(generate(spec))))
        files.append(name)
    return {**base.to_dict(), "count": args.count}, {"directory": str(out), "files": files}


VERBS = {
    "classify": cmd_classify,
    "alpha": cmd_alpha,
    "pcheck": cmd_pcheck,
    "eig": cmd_eig,
    "subtensor": cmd_subtensor,
    "gen": cmd_gen,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--output", default=None)

    search = _Parser(add_help=False)
    search.add_argument("--method", choices=("grid", "multistart"))
    search.add_argument("--h", type=float)
    search.add_argument("--starts", type=int)
    search.add_argument("--iters", type=int)
    search.add_argument("--seed", type=int)
    search.add_argument("--config")

    parser = _Parser(prog="tenstruct", description="Structural analysis of dense real tensors.")
    parser.add_argument("--version", action="version", version=f"tenstruct {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("classify", parents=[common], help="Z / B / B0 / dominance report")
    p.add_argument("input")
    p.add_argument("--tol", type=float)

    p = sub.add_parser("alpha", parents=[common, search], help="estimate alpha(T) or alpha(F)")
    p.add_argument("input")
    p.add_argument("--op", choices=("T", "F"), default="T")

    p = sub.add_parser("pcheck", parents=[common, search], help="P / P0 verdict with witness")
    p.add_argument("input")

    p = sub.add_parser("eig", parents=[common], help="H- or Z-eigenpairs")
    p.add_argument("input")
    p.add_argument("--kind", choices=("H", "Z"), default="Z")
    p.add_argument("--starts", type=int)
    p.add_argument("--iters", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--config")

    p = sub.add_parser("subtensor", parents=[common], help="principal sub-tensor")
    p.add_argument("input")
    p.add_argument("--indices", required=True, help="one-based, comma separated")

    p = sub.add_parser("gen", parents=[common], help="write a seeded corpus")
    p.add_argument("--class", dest="cls", choices=CLASSES)
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--scale", type=float)
    p.add_argument("--spec")
    return parser


def _text(doc, prefix="") -> list[str]:
    lines = []
    if isinstance(doc, dict):
        for key in sorted(doc):
            val = doc[key]
            if isinstance(val, (dict, list)) and val and not _flat_list(val):
                lines.append(f"{prefix}{key}:")
                lines += _text(val, prefix + "  ")
            else:
                lines.append(f"{prefix}{key}: {_scalar(val)}")
    elif isinstance(doc, list):
        for k, item in enumerate(doc):
            lines.append(f"{prefix}[{k}]")
            lines += _text(item, prefix + "  ")
    else:
        lines.append(f"{prefix}{_scalar(doc)}")
    return lines


def _flat_list(val) -> bool:
    return isinstance(val, list) and all(not isinstance(v, (dict, list)) for v in val)


def _scalar(val) -> str:
    if isinstance(val, list):
        return "[" + ", ".join(_scalar(v) for v in val) + "]"
    if val is None:
        return "-"
    return json.dumps(val, default=_jsonable)


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def run(argv: list[str]) -> int:
    try:
        args = build_parser().parse_args(argv)
        config, result = VERBS[args.verb](args)
    except ResourceLimit as exc:
        _error(exc, exc.module)
        return EXIT_RESOURCE
    except FileNotFoundError as exc:
        _error(exc, "cli")
        return EXIT_INVALID
    except TenstructError as exc:
        _error(exc, exc.module)
        if exc.module in ("cli", "tensor_core") or isinstance(exc, (ValueError, IndexError)):
            return EXIT_INVALID
        return EXIT_FAIL
    except ValueError as exc:
        _error(exc, "cli")
        return EXIT_INVALID

    if args.verb == "subtensor":
        # a tensor file, in the same schema as the input
        _emit(dumps(result), args.output)
        return EXIT_OK
    if args.verb == "gen":
        args.output = None  # --output names the corpus directory
    report = {"tool": "tenstruct", "version": __version__, "command": args.verb,
              "config": config, "result": result}
    if getattr(args, "input", None):
        report["input"] = args.input
    if args.format == "json":
        _emit(dumps(report), args.output)
    else:
        _emit("\n".join(_text(report)) + "\n", args.output)
    return EXIT_OK


def _error(exc: BaseException, module: str) -> None:
    doc = {"error": type(exc).__name__, "module": module, "message": str(exc)}
    sys.stderr.write(json.dumps(doc, sort_keys=True) + "\n")


def main(argv: list[str] | None = None) -> int:
    return run(sys.argv[1:] if argv is None else argv)
