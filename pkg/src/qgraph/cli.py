"""Command-line front end.

Exit codes: 0 ok, 2 bad input, 3 out of scope (e.g. irregular conditions),
4 numerical failure, 5 not a star graph, 6 point on the spectrum, 7 Cayley pole.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import boundary as bd
from .classify import ReportOptions, cnum, eigen_rows, report, similarity_verdict_star
from .errors import GraphError, IrregularPencil, QGraphError, SpecError
from .graph import MetricGraph


# ---------------------------------------------------------------------------
# Problem specification


@dataclass
class ProblemSpec:
    graph: MetricGraph
    bc: bd.BoundaryConditions
    options: dict = field(default_factory=dict)


def _complex(value) -> complex:
    if isinstance(value, dict):
        try:
            return complex(float(value["re"]), float(value.get("im", 0.0)))
        except KeyError:
            raise SpecError("complex number object is missing field 're'") from None
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", "").replace("i", "j"))
        except ValueError:
            raise SpecError(f"cannot parse complex number {value!r}") from None
    if isinstance(value, (int, float)):
        return complex(value)
    raise SpecError(f"cannot parse complex number {value!r}")


def _matrix(rows, name: str) -> np.ndarray:
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise SpecError(f"field {name!r} must be a list of rows")
    return np.array([[_complex(v) for v in r] for r in rows], dtype=complex)


def _load_json(path: str) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from None


def parse_graph(arg) -> MetricGraph:
    """A JSON file, a dict, or a shorthand: interval[:a], star:n, pumpkin:n[:a]."""
    if isinstance(arg, dict):
        return MetricGraph.from_dict(arg)
    name, *params = str(arg).split(":")
    try:
        if name == "interval":
            return MetricGraph.interval(float(params[0]) if params else 1.0)
        if name == "star":
            return MetricGraph.star(int(params[0]))
        if name == "pumpkin":
            return MetricGraph.pumpkin(int(params[0]), float(params[1]) if len(params) > 1 else 1.0)
    except (IndexError, ValueError):
        raise GraphError(f"bad graph shorthand {arg!r}") from None
    data = _load_json(arg)
    if not isinstance(data, dict):
        raise GraphError("graph description must be a JSON object")
    return MetricGraph.from_dict(data)


def parse_bc(arg, graph: MetricGraph) -> bd.BoundaryConditions:
    """A JSON file/dict with A and B (or preset/param), or PRESET[:param]."""
    if isinstance(arg, str) and not arg.endswith(".json") and not Path(arg).is_file():
        name, _, param = arg.partition(":")
        return bd.preset(name, graph, _complex(param) if param else None)
    data = arg if isinstance(arg, dict) else _load_json(arg)
    if not isinstance(data, dict):
        raise SpecError("boundary conditions must be a JSON object")
    if "preset" in data:
        param = data.get("param")
        return bd.preset(str(data["preset"]), graph, None if param is None else _complex(param))
    for key in ("A", "B"):
        if key not in data:
            raise SpecError(f"boundary conditions are missing field {key!r}")
    bc = bd.BoundaryConditions(_matrix(data["A"], "A"), _matrix(data["B"], "B"))
    bc.check_graph(graph)
    return bc


def load_problem(args) -> ProblemSpec:
    options: dict = {}
    graph_arg, bc_arg = args.graph, args.bc
    if args.spec:
        data = _load_json(args.spec)
        if not isinstance(data, dict):
            raise SpecError("problem spec must be a JSON object")
        for key in ("graph", "bc"):
            if key not in data and getattr(args, key) is None:
                raise SpecError(f"problem spec is missing field {key!r}")
        graph_arg = graph_arg or data.get("graph")
        bc_arg = bc_arg or data.get("bc")
        options = dict(data.get("options", {}))
    if graph_arg is None or bc_arg is None:
        raise SpecError("need --graph and --bc (or --spec FILE)")
    graph = parse_graph(graph_arg)
    return ProblemSpec(graph, parse_bc(bc_arg, graph), options)


# ---------------------------------------------------------------------------
# Output


def _jsonable(obj):
    if isinstance(obj, complex):
        return cnum(obj)
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def dumps(doc) -> str:
    return json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"


def load_schema(name: str | None = None) -> dict:
    text = resources.files("qgraph").joinpath("schema/qgraph.schema.json").read_text()
    schema = json.loads(text)
    if name is None:
        return schema
    return {"$schema": schema["$schema"], "$defs": schema["$defs"], "$ref": f"#/$defs/{name}"}


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([f"{v:.16g}" if isinstance(v, float) else v for v in r])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Commands


def _region(args, spec: ProblemSpec):
    region = args.region or spec.options.get("region")
    return None if region is None else tuple(float(v) for v in region)


def cmd_classify(args, spec: ProblemSpec) -> str:
    opts = ReportOptions(spectrum_region=_region(args, spec), tol=args.tol or 1e-10)
    return dumps(report(spec.bc, spec.graph, opts))


def cmd_spectrum(args, spec: ProblemSpec) -> str:
    from .spectral import compact_spectrum, star_point_spectrum

    cls = bd.classify(spec.bc)
    if not cls.regular:
        raise IrregularPencil(
            f"boundary conditions are {cls.tag}: the spectrum may be empty or all of the complex plane"
        )
    if spec.graph.n_internal:
        region = _region(args, spec)
        if region is None:
            raise SpecError("graphs with internal edges need --region re0 re1 im0 im1")
        rep = compact_spectrum(spec.bc, spec.graph, region, tol=args.tol or 1e-8)
    else:
        rep = star_point_spectrum(spec.bc, spec.graph)
    if args.format == "json":
        doc = {"eigenvalues": eigen_rows(rep), "whole_plane": rep.whole_plane}
        if rep.total_winding is not None:
            doc["total_winding"] = rep.total_winding
        if rep.essential:
            doc["essential"] = [0.0, "inf"]
        return dumps(doc)
    rows = [
        (float(e.k.real), float(e.k.imag), float(e.lam.real), float(e.lam.imag), e.multiplicity)
        for e in rep.point_spectrum
    ]
    return _csv(("re_k", "im_k", "re_lambda", "im_lambda", "multiplicity"), rows)


def cmd_greens(args, spec: ProblemSpec) -> str:
    from .spectral import GreensKernel

    k = _complex(args.k)
    n = spec.graph.n_edges
    x = np.array(args.x if args.x else [0.5] * n, dtype=float)
    y = np.array(args.y if args.y else [0.5] * n, dtype=float)
    if x.size != n or y.size != n:
        raise SpecError(f"--x and --y need one position per edge ({n})")
    r = GreensKernel(spec.bc, spec.graph, k)(x, y)
    doc = {"k": k, "lambda": k * k, "x": x.tolist(), "y": y.tolist(), "kernel": [[complex(v) for v in row] for row in r]}
    return dumps(doc)


def cmd_enclosure(args, spec: ProblemSpec) -> str:
    from .spectral import enclosure

    e = enclosure(spec.bc, spec.graph, cone_slope=args.cone_slope)
    return dumps({"kind": e.kind, "c": e.c, "C": e.C, "threshold": e.threshold})


def _slope(x, y) -> float:
    return float(np.polyfit(x, y, 1)[0])


def cmd_witness(args, spec: ProblemSpec) -> str:
    from .spectral import resolvent_witness_irregular, resolvent_witness_nqs

    cls = bd.classify(spec.bc)
    irregular = cls.tag is bd.BCTag.IRREGULAR
    values = [float(v) for v in (args.sweep or ([5, 10, 20] if irregular else [10, 20, 40, 80]))]
    if irregular:
        # quotient * |k|^2 grows like e^{kappa a_min / 2} up to a power of kappa
        rows = [(t, resolvent_witness_irregular(spec.bc, spec.graph, 1j * t).quotient * t * t) for t in values]
        if any(math.isinf(q) for _, q in rows):
            slope = math.inf
        else:
            slope = _slope([t for t, _ in rows], [math.log(q) for _, q in rows])
        header = ("im_k", "scaled_quotient", "semilog_slope")
    else:
        rows = [(t, resolvent_witness_nqs(spec.bc, spec.graph, t).quotient) for t in values]
        slope = _slope([math.log(t) for t, _ in rows], [math.log(q) for _, q in rows])
        header = ("kappa", "quotient", "loglog_slope")
    return _csv(header, [(t, q, slope) for t, q in rows])


def cmd_similarity(args, spec: ProblemSpec) -> str:
    v = similarity_verdict_star(spec.bc, spec.graph, tol=args.tol or 1e-9)
    doc = {"applicable": True, "similar": v.is_similar_to_selfadjoint, "obstruction": str(v.obstruction)}
    if v.eigenvalue is not None:
        doc["eigenvalue"] = v.eigenvalue
    return dumps(doc)


def _initial_profile(text: str, graph: MetricGraph):
    name, *p = text.split(":")
    if name == "sin":
        lengths = graph.edge_extents(1.0)
        return lambda j, x: np.sin(np.pi * x / lengths[j])
    if name == "gauss":
        c = float(p[0]) if p else 1.0
        w = float(p[1]) if len(p) > 1 else 1.0
        return lambda j, x: np.exp(-(((x - c) / w) ** 2))
    if name == "zero":
        return lambda j, x: np.zeros_like(x)
    raise SpecError(f"unknown initial profile {text!r} (sin, gauss[:c[:w]], zero)")


def cmd_evolve(args, spec: ProblemSpec) -> str:
    from .evolve import DiscreteLaplacian, step_heat, step_schrodinger, step_wave

    dl = DiscreteLaplacian(spec.bc, spec.graph, args.h, args.radius, args.scheme)
    psi0 = _initial_profile(args.initial, spec.graph)
    if args.equation == "heat":
        res = step_heat(dl, psi0, args.dt, args.steps)
    elif args.equation == "schrodinger":
        res = step_schrodinger(dl, psi0, args.dt, args.steps)
    else:
        res = step_wave(dl, psi0, None, args.dt, args.steps)
    if args.format == "csv":
        return res.to_csv()
    doc = {
        "equation": args.equation,
        "scheme": dl.scheme,
        "h": args.h,
        "dt": args.dt,
        "radius": args.radius,
        "times": res.times.tolist(),
        "norms": res.norms.tolist(),
        "blowup_step": res.blowup_step,
    }
    if res.energies is not None:
        doc["energies"] = res.energies.tolist()
    return dumps(doc)


COMMANDS = {
    "classify": cmd_classify,
    "spectrum": cmd_spectrum,
    "greens": cmd_greens,
    "enclosure": cmd_enclosure,
    "witness": cmd_witness,
    "similarity": cmd_similarity,
    "evolve": cmd_evolve,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", help="graph JSON file or interval[:a], star:n, pumpkin:n[:a]")
    common.add_argument("--bc", help="boundary-condition JSON file or PRESET[:param]")
    common.add_argument("--spec", help="problem JSON with graph, bc and options")
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--region", type=float, nargs=4, metavar=("RE0", "RE1", "IM0", "IM1"))
    common.add_argument("--out", help="write output to FILE instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default=None)

    p = argparse.ArgumentParser(prog="qgraph", description="Laplacians on metric graphs with general vertex conditions")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp_ = sub.add_parser(name, parents=[common])
        if name == "greens":
            sp_.add_argument("--k", required=True, help="spectral parameter k (lambda = k^2), e.g. 1+2j")
            sp_.add_argument("--x", type=float, nargs="+", help="one position per edge")
            sp_.add_argument("--y", type=float, nargs="+", help="one position per edge")
        elif name == "enclosure":
            sp_.add_argument("--cone-slope", type=float, default=1.0)
        elif name == "witness":
            sp_.add_argument("--sweep", type=float, nargs="+", help="kappa values (or Im k for irregular)")
        elif name == "evolve":
            sp_.add_argument("--equation", choices=("heat", "schrodinger", "wave"), default="heat")
            sp_.add_argument("--h", type=float, default=1e-2)
            sp_.add_argument("--dt", type=float, default=1e-3)
            sp_.add_argument("--steps", type=int, default=100)
            sp_.add_argument("--radius", type=float, default=20.0)
            sp_.add_argument("--scheme", choices=("auto", "form", "stencil"), default="auto")
            sp_.add_argument("--initial", default="gauss:1:1")
    return p


_DEFAULT_FORMAT = {"spectrum": "csv", "witness": "csv"}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.format = args.format or _DEFAULT_FORMAT.get(args.command, "json")
    try:
        spec = load_problem(args)
        text = COMMANDS[args.command](args, spec)
    except QGraphError as exc:
        print(f"qgraph: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    _emit(text, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
