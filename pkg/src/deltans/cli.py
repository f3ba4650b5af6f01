"""Command-line front end.

Every subcommand builds a typed request, obtains a typed response
(either by calling the service handlers in-process or by POSTing to a
running server given with --server), and renders CSV/JSON/SVG output.

Exit codes: 0 success, 2 usage or config error, 3 data/file error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from pydantic import ValidationError

from . import errors
from .dataset import SCHEMA_LINE, load_assessments, load_pairs, load_xyz_pairs, save_assessments, save_pairs
from .errors import ConfigError, DataError, DeltansError, ParseError, SchemaError
from .service import handlers
from .service.schemas import (
    ComputeRequest,
    ComputeResponse,
    FactorsModel,
    FitRequest,
    FitResponse,
    FTestRequest,
    FTestResponse,
    GenerateRequest,
    GenerateResponse,
    PairModel,
    PlotRequest,
    PredictionModel,
    StressRequest,
    StressResponse,
    VariabilityRequest,
    VariabilityResponse,
    XyzPairModel,
)
from .stats import panel_mean_dv

FORMULA_CHOICES = ("cielab", "cie94", "cmc", "ciede2000", "ns")
TARGET_CHOICES = ("ellipsoid", "kl", "klkc", "dl", "power", "magpower")

_LOCAL_HANDLERS = {
    "/compute": handlers.handle_compute,
    "/stress": handlers.handle_stress,
    "/ftest": handlers.handle_ftest,
    "/fit": handlers.handle_fit,
    "/generate": handlers.handle_generate,
    "/variability": handlers.handle_variability,
    "/plot": handlers.handle_plot,
    "/coefficients": handlers.handle_coefficients,
}


def _http_client_factory(base_url: str):
    import httpx

    return httpx.Client(base_url=base_url, timeout=60.0)


def _call(server: str | None, path: str, request, response_cls):
    """Run a handler locally, or POST to the server when one is given."""
    if server is None:
        handler = _LOCAL_HANDLERS[path]
        return handler(request) if request is not None else handler()

    client = _http_client_factory(server)
    try:
        if request is None:
            response = client.get(path)
        else:
            response = client.post(path, json=request.model_dump(mode="json"))
    finally:
        client.close()
    if response.status_code == 200:
        if response_cls is str:
            return response.text
        return response_cls.model_validate(response.json())
    try:
        body = response.json()
    except ValueError:
        raise DataError(f"server returned status {response.status_code}") from None
    if isinstance(body, dict) and isinstance(body.get("error"), str):
        exc_cls = getattr(errors, body["error"], None)
        if isinstance(exc_cls, type) and issubclass(exc_cls, DeltansError):
            if exc_cls is ParseError:
                raise ParseError(str(body.get("detail", "")))
            raise exc_cls(str(body.get("detail", "")))
    raise ConfigError(f"server rejected the request: {json.dumps(body, sort_keys=True)}")


def _write_text(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _csv_table(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(value) for value in row) for row in rows)
    return "\n".join(lines) + "\n"


def _json_text(model) -> str:
    return model.model_dump_json(indent=2, exclude_none=True) + "\n"


def _parse_triple(text: str, flag: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(f"{flag}: expected three comma-separated numbers, got {text!r}")
    try:
        x, y, z = (float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"{flag}: expected three comma-separated numbers, got {text!r}") from None
    return (x, y, z)


def _load_predictions(path) -> list[PredictionModel]:
    """Read pair_id/de columns from a compute-style CSV table."""
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or lines[0].strip() != SCHEMA_LINE:
        raise SchemaError(f"{path}: first line must be {SCHEMA_LINE!r}")
    if len(lines) < 2:
        raise SchemaError(f"{path}: missing header line")
    header = [h.strip() for h in lines[1].split(",")]
    if "pair_id" not in header or "de" not in header:
        raise SchemaError(f"{path}: header must contain pair_id and de columns, got {header!r}")
    id_col, de_col = header.index("pair_id"), header.index("de")
    out = []
    for line_no, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} columns, got {len(cells)}", line=line_no)
        try:
            de = float(cells[de_col])
        except ValueError:
            raise ParseError(f"invalid number {cells[de_col]!r} for de", line=line_no, column="de") from None
        out.append(PredictionModel(pair_id=cells[id_col].strip(), de=de))
    return out


def _pair_models(path, free_magnitude: bool) -> list[PairModel]:
    return [handlers.pair_model_from_record(r) for r in load_pairs(path, allow_any_magnitude=free_magnitude)]


def _assessment_models(path):
    return [handlers.assessment_model_from_record(r) for r in load_assessments(path)]


def _factors_from_args(args) -> FactorsModel:
    return FactorsModel(kl=args.kl, kc=args.kc, kh=args.kh)


def _cmd_compute(args) -> int:
    factors = _factors_from_args(args)
    if args.formula == "ns" and (factors.kl, factors.kc, factors.kh) != (1.0, 1.0, 1.0):
        raise ConfigError("--kl/--kc/--kh: the ns formula has no parametric factor slots")
    if args.xyz:
        xyz_rows = load_xyz_pairs(args.pairs)
        request = ComputeRequest(
            formula=args.formula,
            factors=factors,
            xyz_pairs=[
                XyzPairModel(pair_id=pid, reference=(r.x, r.y, r.z), sample=(s.x, s.y, s.z))
                for pid, r, s in xyz_rows
            ],
            white=_parse_triple(args.white, "--white") if args.white else None,
        )
    else:
        request = ComputeRequest(
            formula=args.formula,
            factors=factors,
            pairs=_pair_models(args.pairs, args.free_magnitude),
        )
    response = _call(args.server, "/compute", request, ComputeResponse)
    if args.json:
        _write_text(_json_text(response), args.output)
    else:
        rows = [[getattr(row, column) for column in response.columns] for row in response.rows]
        _write_text(SCHEMA_LINE + "\n" + _csv_table(response.columns, rows), args.output)
    return 0


def _cmd_stress(args) -> int:
    request = StressRequest(
        assessments=_assessment_models(args.assessments),
        predictions=_load_predictions(args.predictions),
    )
    response = _call(args.server, "/stress", request, StressResponse)
    if args.json:
        _write_text(_json_text(response), args.output)
    else:
        table = _csv_table(("stress", "f_scale", "n"), [(response.stress, response.f_scale, response.n)])
        _write_text(table, args.output)
    return 0


def _cmd_ftest(args) -> int:
    request = FTestRequest(
        stress1=args.stress1,
        stress2=args.stress2,
        confidence=args.confidence,
        n1=args.n1,
        n2=args.n2,
    )
    response = _call(args.server, "/ftest", request, FTestResponse)
    if args.json:
        _write_text(_json_text(response), args.output)
    else:
        table = _csv_table(
            ("f_value", "lower_crit", "upper_crit", "verdict", "confidence"),
            [(response.f_value, response.lower_crit, response.upper_crit, response.verdict, response.confidence)],
        )
        _write_text(table, args.output)
    return 0


def _cmd_fit(args) -> int:
    if (args.dl_a is None) != (args.dl_b is None):
        raise ConfigError("--dl-a/--dl-b: give both line coefficients or neither")
    pair_models = _pair_models(args.pairs, args.free_magnitude)
    records = load_assessments(args.assessments)
    dv = panel_mean_dv(records)
    request = FitRequest(
        target=args.target,
        base=args.base,
        pairs=pair_models,
        dv=dv,
        center_id=args.center,
        per_magnitude=args.per_magnitude,
        mode=args.mode,
        dl_a=args.dl_a,
        dl_b=args.dl_b,
        tolerance=args.tolerance,
        max_evaluations=args.max_evaluations,
    )
    response = _call(args.server, "/fit", request, FitResponse)
    _write_text(_json_text(response), args.output)
    return 0


def _cmd_gen(args) -> int:
    config_path = args.config or os.environ.get("DELTANS_CONFIG")
    if not config_path:
        raise ConfigError("config: no config file given and DELTANS_CONFIG is not set")
    try:
        config = json.loads(Path(config_path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON ({exc})") from None
    if not isinstance(config, dict):
        raise ConfigError("config: top level must be a JSON object")
    request = GenerateRequest(**config)
    response = _call(args.server, "/generate", request, GenerateResponse)
    save_pairs([handlers.pair_record_from_model(m) for m in response.pairs], args.pairs_out)
    if args.assessments_out:
        save_assessments(
            [handlers.assessment_record_from_model(m) for m in response.assessments],
            args.assessments_out,
        )
    return 0


def _cmd_plot(args) -> int:
    try:
        data = json.loads(Path(args.fits).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"fits file: invalid JSON ({exc})") from None
    if isinstance(data, dict) and "fits" in data:
        request = PlotRequest(fits=data["fits"])
    elif isinstance(data, list):
        request = PlotRequest(fits=data)
    else:
        raise ConfigError("fits file: expected a JSON list or an object with a 'fits' key")
    svg = _call(args.server, "/plot", request, str)
    _write_text(svg, args.output)
    return 0


def _cmd_coefficients(args) -> int:
    response = _call(args.server, "/coefficients", None, handlers.CoefficientsResponse)
    _write_text(_json_text(response), args.output)
    return 0


def _cmd_variability(args) -> int:
    request = VariabilityRequest(
        assessments=_assessment_models(args.assessments),
        pairs=_pair_models(args.pairs_file, True) if args.pairs_file else None,
    )
    response = _call(args.server, "/variability", request, VariabilityResponse)
    if args.json:
        _write_text(_json_text(response), args.output)
        return 0
    rows: list[tuple] = []
    for observer in sorted(response.inter):
        rows.append(("inter", observer, response.inter[observer]))
    for observer in sorted(response.intra):
        rows.append(("intra", observer, response.intra[observer]))
    rows.append(("inter_mean", "", response.inter_mean))
    if response.intra_mean is not None:
        rows.append(("intra_mean", "", response.intra_mean))
    for key in sorted(response.by_center):
        rows.append(("by_center", key, response.by_center[key]))
    for key in sorted(response.by_plane):
        rows.append(("by_plane", key, response.by_plane[key]))
    for key in sorted(response.by_magnitude, key=float):
        rows.append(("by_magnitude", key, response.by_magnitude[key]))
    _write_text(_csv_table(("table", "key", "value"), rows), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deltans",
        description="Color-difference computation, STRESS statistics, ellipsoid and parameter fitting.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--server", metavar="URL", help="POST to a running server instead of computing in-process")
    common.add_argument("-o", "--output", metavar="PATH", help="write output to a file instead of stdout")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", parents=[common], help="color differences for a pairs file")
    p.add_argument("pairs", help="pairs CSV (or XYZ pairs CSV with --xyz)")
    p.add_argument("--formula", choices=FORMULA_CHOICES, default="ciede2000")
    p.add_argument("--kl", type=float, default=1.0, help="lightness factor (l weight for cmc)")
    p.add_argument("--kc", type=float, default=1.0, help="chroma factor (c weight for cmc)")
    p.add_argument("--kh", type=float, default=1.0, help="hue factor")
    p.add_argument("--xyz", action="store_true", help="input holds XYZ tristimulus pairs")
    p.add_argument("--white", metavar="X,Y,Z", help="reference white for --xyz (default 95.78,100.00,104.61)")
    p.add_argument("--free-magnitude", action="store_true", help="accept magnitude labels outside {1,2,4,8}")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_compute)

    p = sub.add_parser("stress", parents=[common], help="STRESS between assessments and predictions")
    p.add_argument("assessments", help="assessments CSV")
    p.add_argument("predictions", help="compute-style CSV with pair_id and de columns")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_stress)

    p = sub.add_parser("ftest", parents=[common], help="F-test on two STRESS values")
    p.add_argument("stress1", type=float)
    p.add_argument("stress2", type=float)
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--n1", type=int, help="sample count behind stress1 (omit for the infinite limit)")
    p.add_argument("--n2", type=int, help="sample count behind stress2 (omit for the infinite limit)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_ftest)

    p = sub.add_parser("fit", parents=[common], help="fit ellipsoid/factor/line/power parameters")
    p.add_argument("pairs", help="pairs CSV")
    p.add_argument("assessments", help="assessments CSV")
    p.add_argument("--target", choices=TARGET_CHOICES, required=True)
    p.add_argument("--base", default="ciede2000", help="base formula for non-ellipsoid targets")
    p.add_argument("--center", help="color center id for --target ellipsoid")
    p.add_argument("--per-magnitude", action="store_true", help="one ellipsoid per magnitude level")
    p.add_argument("--mode", choices=("sequential", "joint"), default="sequential", help="magpower: fit d after (a,b), or jointly")
    p.add_argument("--dl-a", type=float, help="fix the lightness-line slope for magpower")
    p.add_argument("--dl-b", type=float, help="fix the lightness-line intercept for magpower")
    p.add_argument("--tolerance", type=float, default=1e-8)
    p.add_argument("--max-evaluations", type=int)
    p.add_argument("--free-magnitude", action="store_true")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("gen", parents=[common], help="generate a design and synthetic assessments")
    p.add_argument("config", nargs="?", help="JSON config (centers, magnitudes, noise_sigma, n_observers, seed, ...); defaults to $DELTANS_CONFIG")
    p.add_argument("--pairs-out", required=True, metavar="PATH")
    p.add_argument("--assessments-out", metavar="PATH")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("plot", parents=[common], help="SVG a*b*-plane ellipse plot from fit JSON")
    p.add_argument("fits", help="fit-response JSON or a JSON list of ellipsoid fits")
    p.set_defaults(func=_cmd_plot)

    p = sub.add_parser("coefficients", parents=[common], help="correction-coefficient registry as JSON")
    p.set_defaults(func=_cmd_coefficients)

    p = sub.add_parser("variability", parents=[common], help="observer variability tables")
    p.add_argument("assessments", help="assessments CSV")
    p.add_argument("--pairs", dest="pairs_file", metavar="PATH", help="pairs CSV for center/plane/magnitude groupings")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_variability)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        first = exc.errors()[0]
        location = ".".join(str(part) for part in first.get("loc", ())) or "request"
        print(f"error: invalid field {location}: {first.get('msg', 'invalid value')}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, SchemaError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DeltansError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
