"""Command-line front end.

One computation per invocation.  Models are named built-ins or JSON files
(either a descriptor or a spectrum written by ``model emit``); results go to
stdout or ``--output`` as JSON or CSV.  Every asymptotic number is printed
with its error band.

Exit codes: 0 success, 1 a property check failed, 2 malformed input
(schema violation or unreadable JSON), 3 indeterminate or non-converged
result, 4 refused precondition.  ``--allow-indeterminate`` turns code 3 into 0
while keeping the ``converged`` flags in the output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import jsonschema
import numpy as np

from . import __version__
from .errors import IndeterminateError, PreconditionError, SemifiniteError, TailUncertainError
from .index_chern import FredholmPair, calderon_index, odd_pairing, odd_pairing_ratio, tau_index
from .limiting import LimitProcessConfig, dixmier_trace, log_grid
from .models import ToeplitzModel, circle_dirac, synthetic_spectrum, torus_model
from .properties import run_property_suite
from .spectral_core import WeightedSpectrum, classify, mu, sigma
from .symbols_residue import ClassicalSymbol, foliated_residue, hochschild_pairing, laplacian_resolvent_symbol
from .trig import TrigPoly
from .zeta_heat import gaussian, regularized_integral, residue_to_dixmier, smooth_indicator, zeta

EXIT_OK, EXIT_PROPERTY, EXIT_SCHEMA, EXIT_INDETERMINATE, EXIT_PRECONDITION = 0, 1, 2, 3, 4

MODEL_KINDS = ("circle-dirac", "torus-laplacian", "torus-dirac", "harmonic")
DEFAULT_CUTOFFS = {"circle-dirac": 100_000, "torus-laplacian": 2000, "torus-dirac": 2000, "harmonic": 1e8}

_POSITIVE = {"type": "number", "exclusiveMinimum": 0}

DESCRIPTOR_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": list(MODEL_KINDS)},
        "p": {"type": "integer", "minimum": 1, "maximum": 4},
        "cutoff": {"type": "number", "minimum": 1},
        "lambda_weights": {"type": "array", "items": _POSITIVE, "minItems": 1},
        "power": {"type": "number"},
        "kernel": {"enum": ["regularize", "drop"]},
        "exponent": _POSITIVE,
    },
    "required": ["kind"],
    "additionalProperties": False,
}

TAIL_SCHEMA = {
    "type": "object",
    "properties": {
        "c": _POSITIVE,
        "d": _POSITIVE,
        "side": {"enum": ["zero", "infinity"]},
        "rel_tol": _POSITIVE,
    },
    "required": ["c", "d"],
    "additionalProperties": False,
}

SPECTRUM_SCHEMA = {
    "type": "object",
    "properties": {
        "atoms": {
            "type": "array",
            "items": {
                "type": "array",
                "prefixItems": [{"type": "number", "minimum": 0}, _POSITIVE],
                "items": False,
                "minItems": 2,
            },
        },
        "tail": {"oneOf": [{"type": "null"}, TAIL_SCHEMA]},
        "cutoff_note": {"type": "string"},
        "metadata": {"type": "object"},
    },
    "required": ["atoms"],
    "additionalProperties": False,
}

_COEFF = {
    "oneOf": [
        {"type": "number"},
        {"type": "string"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        {"type": "array", "items": {"type": "array"}, "minItems": 1},
    ]
}

TRIG_SCHEMA = {
    "type": "object",
    "properties": {
        "p": {"type": "integer", "minimum": 1},
        "coeffs": {
            "oneOf": [
                {"type": "object", "minProperties": 1, "additionalProperties": _COEFF},
                {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "array", "minItems": 2, "maxItems": 2},
                },
            ]
        },
    },
    "required": ["coeffs"],
}

SYMBOL_SCHEMA = {
    "type": "object",
    "properties": {
        "order": {"type": "integer"},
        "p": {"type": "integer", "minimum": 1, "maximum": 4},
        "coeffs": TRIG_SCHEMA["properties"]["coeffs"],
        "xi_monomials": {"type": "array", "items": {"type": "array", "minItems": 2, "maxItems": 2}},
    },
    "required": ["order", "coeffs"],
    "additionalProperties": False,
}

HOCHSCHILD_SCHEMA = {"type": "array", "items": TRIG_SCHEMA, "minItems": 1}


class SchemaError(Exception):
    """Input failed JSON parsing or schema validation; ``pointer`` locates the problem."""

    def __init__(self, message: str, pointer: str = "", source: str = ""):
        super().__init__(message)
        self.pointer = pointer or "/"
        self.source = source


# -- input ---------------------------------------------------------------------


def _read_json(text_or_path: str, label: str):
    """Parse inline JSON, or the file it names."""
    source = label
    text = text_or_path
    stripped = text_or_path.lstrip()
    if not stripped.startswith(("{", "[")):
        path = Path(text_or_path)
        if not path.is_file():
            raise SchemaError(f"{label}: no such file or inline JSON: {text_or_path!r}", source=label)
        text = path.read_text()
        source = str(path)
    if not text.strip():
        raise SchemaError(f"{source}: empty document", "/", source)
    try:
        return json.loads(text), source
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{source}: invalid JSON ({exc.msg} at line {exc.lineno} column {exc.colno})",
                          "/", source) from None


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path)


def validate(document, schema, source: str = ""):
    """Validate against ``schema``; raise :class:`SchemaError` at the most relevant failure."""
    error = jsonschema.exceptions.best_match(jsonschema.Draft202012Validator(schema).iter_errors(document))
    if error is not None:
        raise SchemaError(f"{source}: {error.message}", _pointer(error.absolute_path), source)


def _estimator(args) -> LimitProcessConfig:
    return LimitProcessConfig(
        cesaro_iterations=args.cesaro_iters, window_decades=args.window_decades, tol=args.tol
    )


class ResolvedModel:
    """A loaded model: either a built-in operator model or a raw spectrum."""

    def __init__(self, kind: str, spectrum_factory, natural_power: float, p: int, weights, meta):
        self.kind = kind
        self._factory = spectrum_factory
        self.natural_power = natural_power
        self.p = p
        self.weights = weights
        self.meta = meta

    def operator(self) -> WeightedSpectrum:
        """Spectrum on the unbounded side (tail side ``infinity``)."""
        spec = self._factory()
        if spec.tail is not None and spec.tail.side == "zero":
            spec = spec.power(-1.0)
        return self._weighted(spec)

    def compact(self, power: Optional[float] = None) -> WeightedSpectrum:
        """Spectrum of ``operator^-power`` (defaults to the model's natural power)."""
        spec = self._factory()
        power = self.natural_power if power is None else power
        if spec.tail is not None and spec.tail.side == "infinity":
            spec = spec.power(-power)
        elif power != self.natural_power:
            spec = spec.power(power / self.natural_power)
        return self._weighted(spec)

    def _weighted(self, spec):
        mass = math.fsum(self.weights) if self.weights else 1.0
        return spec if mass == 1.0 else spec.scale_weights(mass)


def resolve_model(value: str, args) -> ResolvedModel:
    """Interpret ``--model``: a built-in kind name or a JSON descriptor/spectrum."""
    if value in MODEL_KINDS:
        doc, source = {"kind": value}, "--model"
    else:
        doc, source = _read_json(value, "--model")
        if not isinstance(doc, dict) or not doc:
            raise SchemaError(f"{source}: model must be a non-empty JSON object", "/", source)
    if "atoms" in doc:
        validate(doc, SPECTRUM_SCHEMA, source)
        spec = WeightedSpectrum.from_dict(doc)
        if spec.is_empty:
            raise SchemaError(f"{source}: spectrum has no atoms", "/atoms", source)
        meta = dict(doc.get("metadata", {}))
        natural = float(meta.get("power", 1.0))
        return ResolvedModel("spectrum", lambda: spec, natural, int(meta.get("p", 1)), None, meta)
    validate(doc, DESCRIPTOR_SCHEMA, source)
    kind = doc["kind"]
    p = int(doc.get("p", args.p if getattr(args, "p", None) else (1 if kind == "circle-dirac" else 2)))
    if kind == "circle-dirac" and p != 1:
        raise SchemaError(f"{source}: circle-dirac has p = 1", "/p", source)
    cutoff = args.cutoff if args.cutoff is not None else doc.get("cutoff", DEFAULT_CUTOFFS[kind])
    kernel = doc.get("kernel", "regularize")
    weights = doc.get("lambda_weights")
    meta = {"kind": kind, "p": p, "cutoff": cutoff, "kernel": kernel}
    if weights:
        meta["lambda_weights"] = weights
    if kind == "harmonic":
        exponent = float(doc.get("exponent", 1.0))
        natural = float(doc.get("power", 1.0))
        meta.update(exponent=exponent, power=natural)
        return ResolvedModel(kind, lambda: synthetic_spectrum(exponent, float(cutoff)), natural, 1, weights, meta)
    if kind == "circle-dirac":
        model = circle_dirac(int(cutoff))
        natural = 1.0
    else:
        model = torus_model(p, kind.split("-")[1], int(cutoff))
        natural = p / 2.0 if kind == "torus-laplacian" else float(p)
    natural = float(doc.get("power", natural))
    meta.update(power=natural, description=model.description)
    return ResolvedModel(kind, lambda: model.operator_spectrum(kernel), natural, p, weights, meta)


def _trig(value: str, label: str, p: Optional[int] = None) -> TrigPoly:
    doc, source = _read_json(value, label)
    validate(doc, TRIG_SCHEMA, source)
    try:
        return TrigPoly.from_dict(doc, p=p or doc.get("p"))
    except (ValueError, TypeError, KeyError) as exc:
        raise SchemaError(f"{source}: {exc}", "/coeffs", source) from None


# -- output ---------------------------------------------------------------------


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


class Result:
    """What a subcommand produced: a summary mapping and an optional table.

    JSON output is the summary with the table under ``"table"``.  CSV output is
    the table, preceded by ``# key=value`` comment lines for the summary; a
    command without a table prints the flattened summary as ``key,value`` rows.
    """

    def __init__(self, summary: Dict[str, Any], columns: Sequence[str] = (), rows: Sequence[Sequence] = (),
                 converged: bool = True, failed: bool = False, raw=None):
        self.summary = summary
        self.raw = raw
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]
        self.converged = converged
        self.failed = failed

    def render(self, fmt: str) -> str:
        if self.raw is not None:
            return json.dumps(_plain(self.raw), separators=(",", ":")) + "\n"
        if fmt == "json":
            doc = dict(self.summary)
            if self.columns:
                doc["table"] = {"columns": self.columns, "rows": self.rows}
            return json.dumps(_plain(doc), indent=2, sort_keys=False) + "\n"
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if self.columns:
            for key, val in _flatten(self.summary):
                buf.write(f"# {key}={_csv_value(val)}\n")
            writer.writerow(self.columns)
            for row in self.rows:
                writer.writerow([_csv_value(v) for v in row])
        else:
            writer.writerow(["key", "value"])
            for key, val in _flatten(self.summary):
                writer.writerow([key, _csv_value(val)])
        return buf.getvalue()


def _flatten(mapping, prefix=""):
    for key, val in _plain(mapping).items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            yield from _flatten(val, name + ".")
        elif isinstance(val, list):
            yield name, json.dumps(val)
        else:
            yield name, val


def _csv_value(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def write_atomic(text: str, destination: str):
    """Write ``text`` to ``destination`` in one step (temporary file + rename)."""
    if destination in ("-", ""):
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader went away (e.g. piped into head); silence the shutdown flush
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return
    target = Path(destination)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _estimate_summary(est, **extra):
    out = {"value": est.value, "error_band": est.error_band, "converged": est.converged}
    out.update(extra)
    out["method"] = est.diagnostics.get("method")
    return out


def _estimate_table(est):
    if not est.table:
        return [], []
    columns = list(est.table)
    rows = np.column_stack([np.asarray(est.table[c], dtype=float) for c in columns])
    return columns, rows.tolist()


# -- subcommands ------------------------------------------------------------------


def _t_values(args, spec: WeightedSpectrum):
    if args.t:
        return np.asarray(args.t, dtype=float)
    top = spec.total_weight * (2.0 if spec.tail is not None else 1.0)
    return log_grid(max(top, 1.0), 1.0, args.per_decade)


def cmd_model_emit(args) -> Result:
    model = resolve_model(args.model, args)
    spec = model.operator() if args.side == "operator" else model.compact(args.power)
    meta = dict(model.meta)
    meta["side"] = args.side
    if args.side == "compact":
        meta["power"] = model.natural_power if args.power is None else args.power
    doc = spec.to_dict()
    doc["metadata"] = meta
    return Result({"spectrum": doc, "atoms": len(spec), "total_weight": spec.total_weight}, raw=doc)


def cmd_mu(args) -> Result:
    spec = resolve_model(args.model, args).compact(args.power)
    t = _t_values(args, spec)
    values = mu(spec, t)
    return Result({"atoms": len(spec), "total_weight": spec.total_weight}, ["t", "mu"], zip(t, values))


def cmd_sigma(args) -> Result:
    spec = resolve_model(args.model, args).compact(args.power)
    t = _t_values(args, spec)
    values, bounds = sigma(spec, t, with_bound=True)
    values, bounds = np.atleast_1d(values), np.atleast_1d(bounds)
    return Result({"atoms": len(spec), "total_weight": spec.total_weight}, ["t", "sigma", "bound"],
                  zip(t, values, bounds))


def cmd_classify(args) -> Result:
    spec = resolve_model(args.model, args).compact(args.power)
    cls = classify(spec, args.exponent, window_decades=args.window_decades)
    return Result(cls.to_dict(), converged=not cls.indeterminate)


def cmd_dixmier(args) -> Result:
    model = resolve_model(args.model, args)
    spec = model.compact(args.power)
    est = dixmier_trace(spec, _estimator(args))
    columns, rows = _estimate_table(est)
    summary = _estimate_summary(est, model=model.meta)
    summary["candidates"] = est.diagnostics.get("candidates")
    return Result(summary, columns, rows, converged=est.converged)


def cmd_zeta(args) -> Result:
    model = resolve_model(args.model, args)
    spec = model.operator()
    if args.z:
        rows = []
        for z in args.z:
            val, bound = zeta(spec, z, with_bound=True)
            rows.append([z, val, bound])
        return Result({"model": model.meta}, ["z", "zeta", "bound"], rows)
    prof = residue_to_dixmier(spec, levels=args.levels, margin=args.margin, tol=args.tol)
    summary = {k: v for k, v in prof.to_dict().items() if k != "diagnostics"}
    summary["bands"] = {"A": prof.A_band, "trace": prof.trace_band}
    summary["model"] = model.meta
    diag = prof.diagnostics
    rows = zip(diag["x"], diag["samples"])
    return Result(summary, ["x", "scaled_zeta"], rows, converged=prof.converged)


def cmd_heat(args) -> Result:
    model = resolve_model(args.model, args)
    spec = model.operator()
    f = gaussian if args.function == "gaussian" else smooth_indicator()
    est = regularized_integral(spec, 1.0, f, float(model.p), _estimator(args))
    columns, rows = _estimate_table(est)
    summary = _estimate_summary(est, function=args.function, p=model.p, C_p=est.diagnostics.get("C_p"),
                                model=model.meta)
    return Result(summary, columns, rows, converged=est.converged)


def cmd_residue(args) -> Result:
    weights = args.lambda_weights or [1.0]
    if args.symbol:
        doc, source = _read_json(args.symbol, "--symbol")
        validate(doc, SYMBOL_SCHEMA, source)
        try:
            symbol = ClassicalSymbol.from_dict(doc)
        except (ValueError, TypeError, KeyError) as exc:
            raise SchemaError(f"{source}: {exc}", "/coeffs", source) from None
    else:
        symbol = laplacian_resolvent_symbol(args.p or 2)
    value = foliated_residue(symbol, weights, grid=args.grid)
    return Result({"value": value, "error_band": 0.0, "p": symbol.p, "order": symbol.order,
                   "lambda_mass": math.fsum(weights), "grid": args.grid})


def cmd_index(args) -> Result:
    u = _trig(args.symbol, "--symbol", p=1)
    cutoff = int(args.cutoff) if args.cutoff is not None else 512
    model = ToeplitzModel(u, cutoff, args.c)
    kernel = tau_index(model)
    pair = FredholmPair.from_toeplitz(model, p=1.0)
    calderon = {str(n): calderon_index(pair, n) for n in args.n}
    pairing = {f"k={k}": odd_pairing(u, k, args.c).index for k in args.k}
    values = [kernel, *calderon.values(), *pairing.values()]
    spread = max(values) - min(values)
    summary = {
        "index_kernel": kernel,
        "index_calderon": calderon,
        "pairing": pairing,
        "bands": {"spread": spread, "remainder_drift": pair.stability.get("drift", 0.0)},
        "winding_number": u.winding_number(),
        "c": args.c,
        "cutoff": cutoff,
    }
    rows = [["kernel", "", kernel]]
    rows += [["calderon", n, v] for n, v in calderon.items()]
    rows += [["cocycle", k.split("=")[1], v] for k, v in pairing.items()]
    return Result(summary, ["route", "degree", "index"], rows)


def cmd_cocycle(args) -> Result:
    if args.kind == "odd":
        if not args.symbol:
            raise PreconditionError("odd cocycle needs --symbol")
        u = _trig(args.symbol, "--symbol", p=1)
        rows, summary = [], {"c": args.c, "method": args.method}
        for k in args.k:
            pr = odd_pairing(u, k, args.c, method=args.method)
            ratio = odd_pairing_ratio(u, k, args.c) if args.method == "exact" else None
            rows.append([k, pr.raw, pr.index, pr.trace, ratio])
        return Result(summary, ["k", "raw", "index", "trace", "ratio_to_next"], rows)
    if not args.args:
        raise PreconditionError("hochschild cocycle needs --args")
    doc, source = _read_json(args.args, "--args")
    validate(doc, HOCHSCHILD_SCHEMA, source)
    polys = [TrigPoly.from_dict(item) for item in doc]
    val = hochschild_pairing(polys, grid=args.grid)
    return Result({"raw": val.raw, "normalization": val.normalization, "value": val.value, "p": val.p})


def cmd_proptest(args) -> Result:
    results = run_property_suite(args.seed, args.cases)
    rows = [[r.name, r.cases, r.checks, r.max_violation, r.passed] for r in results]
    failed = not all(r.passed for r in results)
    summary = {"seed": args.seed, "cases": args.cases, "passed": not failed}
    return Result(summary, ["property", "cases", "checks", "max_violation", "passed"], rows, failed=failed)


# -- parser -------------------------------------------------------------------------


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cutoff", type=float, default=None, help="mode cutoff / lattice radius override")
    common.add_argument("--cesaro-iters", type=int, default=3, help="log-Cesaro passes (default 3)")
    common.add_argument("--window-decades", type=float, default=2.0, help="estimator window (default 2)")
    common.add_argument("--tol", type=float, default=1e-3, help="relative tolerance (default 1e-3)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--allow-indeterminate", action="store_true",
                        help="exit 0 on non-converged or indeterminate results")
    common.add_argument("-o", "--output", default="-", help="output file (default stdout)")
    return common


def _model_args(p: argparse.ArgumentParser, power=True):
    p.add_argument("--model", required=True,
                   help=f"built-in ({', '.join(MODEL_KINDS)}) or JSON descriptor/spectrum (inline or file)")
    p.add_argument("--p", type=int, default=None, help="torus dimension for built-in torus models")
    if power:
        p.add_argument("--power", type=float, default=None, help="use operator^-power (default: natural power)")


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="semifinite", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    model = sub.add_parser("model", help="model utilities")
    model_sub = model.add_subparsers(dest="action", required=True)
    emit = model_sub.add_parser("emit", parents=[common], help="write a spectrum file")
    _model_args(emit)
    emit.add_argument("--side", choices=("compact", "operator"), default="compact")
    emit.set_defaults(func=cmd_model_emit)

    for name, func, helptext in (
        ("mu", cmd_mu, "generalized singular numbers mu_t"),
        ("sigma", cmd_sigma, "partial traces sigma_t with tail bounds"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        _model_args(p)
        p.add_argument("--t", type=float, nargs="+", help="query points (default: log grid)")
        p.add_argument("--per-decade", type=int, default=8)
        p.set_defaults(func=func)

    p = sub.add_parser("classify", parents=[common], help="ideal membership")
    _model_args(p)
    p.add_argument("--exponent", type=float, default=1.0, help="weak-L^p exponent to test")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("dixmier", parents=[common], help="Dixmier trace with Cesaro diagnostics")
    _model_args(p)
    p.set_defaults(func=cmd_dixmier)

    p = sub.add_parser("zeta", parents=[common], help="zeta residue and induced trace, or a zeta sweep")
    _model_args(p, power=False)
    p.add_argument("--z", type=float, nargs="+", help="evaluate zeta at these points instead")
    p.add_argument("--levels", type=int, default=5)
    p.add_argument("--margin", type=float, default=0.5)
    p.set_defaults(func=cmd_zeta)

    p = sub.add_parser("heat", parents=[common], help="regularized trace of f(t |D|) as t -> 0")
    _model_args(p, power=False)
    p.add_argument("--function", choices=("gaussian", "indicator"), default="gaussian")
    p.set_defaults(func=cmd_heat)

    p = sub.add_parser("residue", parents=[common], help="foliated local residue of a classical symbol")
    p.add_argument("--symbol", help="symbol JSON {order, p, coeffs, xi_monomials} (inline or file)")
    p.add_argument("--p", type=int, default=None, help="dimension for the default (1+Delta)^(-p/2) symbol")
    p.add_argument("--lambda-weights", type=float, nargs="+", help="transverse weights (default [1])")
    p.add_argument("--grid", type=int, default=32)
    p.set_defaults(func=cmd_residue)

    p = sub.add_parser("index", parents=[common], help="Toeplitz index by kernels, Calderon and cocycles")
    p.add_argument("--symbol", required=True, help='symbol JSON, e.g. {"coeffs":{"1":1}}')
    p.add_argument("--c", type=float, default=1.0, help="trace scale")
    p.add_argument("--n", type=int, nargs="+", default=[1, 2], help="Calderon powers")
    p.add_argument("--k", type=int, nargs="+", default=[0, 1], help="odd cocycle degrees")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("cocycle", parents=[common], help="odd Chern pairings or the Hochschild class")
    p.add_argument("--kind", choices=("odd", "hochschild"), default="odd")
    p.add_argument("--symbol", help="invertible symbol on the circle (odd)")
    p.add_argument("--k", type=int, nargs="+", default=[0, 1, 2])
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--method", choices=("exact", "truncated", "doubled"), default="exact")
    p.add_argument("--args", help="JSON list of p+1 trig polynomials on T^p (hochschild)")
    p.add_argument("--grid", type=int, default=None)
    p.set_defaults(func=cmd_cocycle)

    p = sub.add_parser("proptest", parents=[common], help="seeded singular-number property suite")
    p.add_argument("--cases", type=int, default=200)
    p.set_defaults(func=cmd_proptest)
    return parser


def _error(message: str, **fields):
    doc = {"error": message}
    doc.update(fields)
    sys.stderr.write(json.dumps(_plain(doc)) + "\n")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.func(args)
    except SchemaError as exc:
        _error(str(exc), kind="schema", pointer=exc.pointer)
        return EXIT_SCHEMA
    except IndeterminateError as exc:
        _error(str(exc), kind="indeterminate", diagnostics=exc.diagnostics)
        return EXIT_OK if args.allow_indeterminate else EXIT_INDETERMINATE
    except TailUncertainError as exc:
        _error(str(exc), kind="precondition", bound=list(exc.bound))
        return EXIT_PRECONDITION
    except (PreconditionError, SemifiniteError) as exc:
        _error(str(exc), kind="precondition")
        return EXIT_PRECONDITION
    write_atomic(result.render(args.format), args.output)
    if result.failed:
        return EXIT_PROPERTY
    if not result.converged and not args.allow_indeterminate:
        _error("result did not converge within tolerance", kind="indeterminate")
        return EXIT_INDETERMINATE
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
