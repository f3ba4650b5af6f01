"""Pure request -> response functions shared by the HTTP app and the CLI."""

from __future__ import annotations

from ..color import DEFAULT_WHITE, LabColor, WhitePoint, XyzColor, pair_differences, xyz_to_lab
from ..corrections import ParametricFactors, formula_function, registry_rows
from ..dataset import (
    CENTER_INDEX,
    ColorCenter,
    ExperimentDesign,
    PairRecord,
    generate_design,
    synthesize_assessments,
)
from ..ellipse import EllipsoidFit, fit_ellipsoid, plane_ellipse
from ..errors import ConfigError, DataError, DomainError, FitError
from ..formulas import delta_e_ciede2000, delta_e_ns, normalize_formula
from ..optimize import fit_dl_line, fit_parametric_factors, fit_power
from ..stats import AssessmentRecord, f_test, observer_variability, panel_mean_dv, stress
from ..svgplot import EllipsePlacement, render_ellipses
from .schemas import (
    AssessmentModel,
    CoefficientRowModel,
    CoefficientsResponse,
    ComputeRequest,
    ComputeResponse,
    ComputeRow,
    EllipsoidFitModel,
    FitRequest,
    FitResponse,
    FTestRequest,
    FTestResponse,
    GenerateRequest,
    GenerateResponse,
    PairModel,
    PlaneEllipseModel,
    PlotRequest,
    StressRequest,
    StressResponse,
    VariabilityRequest,
    VariabilityResponse,
)

FIT_TARGETS = ("ellipsoid", "kl", "klkc", "dl", "power", "magpower")

_COLUMNS_PLAIN = ["pair_id", "de"]
_COLUMNS_DE2000 = ["pair_id", "de", "dl_prime", "dc_prime", "dh_prime", "rt_term"]
_COLUMNS_NS = ["pair_id", "de", "de00", "d_l", "dl_prime", "dc_prime", "dh_prime", "rt_term"]


def pair_model_from_record(record: PairRecord) -> PairModel:
    return PairModel(
        pair_id=record.pair_id,
        reference=(record.reference.l, record.reference.a, record.reference.b),
        sample=(record.sample.l, record.sample.a, record.sample.b),
        center_id=record.center_id,
        plane=record.plane,
        magnitude_label=record.magnitude_label,
    )


def pair_record_from_model(model: PairModel) -> PairRecord:
    return PairRecord(
        pair_id=model.pair_id,
        center_id=model.center_id,
        plane=model.plane,
        magnitude_label=model.magnitude_label if model.magnitude_label is not None else 0.0,
        reference=LabColor(*model.reference),
        sample=LabColor(*model.sample),
    )


def assessment_model_from_record(record: AssessmentRecord) -> AssessmentModel:
    return AssessmentModel(
        pair_id=record.pair_id,
        observer_id=record.observer_id,
        session=record.session,
        gs=record.gs,
        dv=record.dv,
    )


def assessment_record_from_model(model: AssessmentModel) -> AssessmentRecord:
    if model.dv is None:
        return AssessmentRecord.from_gs(model.pair_id, model.observer_id, model.session, model.gs)
    return AssessmentRecord(model.pair_id, model.observer_id, model.session, model.gs, model.dv)


def _resolved_lab_pairs(request: ComputeRequest) -> list[tuple[str, LabColor, LabColor]]:
    if request.pairs is not None:
        return [
            (p.pair_id, LabColor(*p.reference), LabColor(*p.sample))
            for p in request.pairs
        ]
    white = WhitePoint(*request.white) if request.white is not None else DEFAULT_WHITE
    return [
        (
            p.pair_id,
            xyz_to_lab(XyzColor(*p.reference), white),
            xyz_to_lab(XyzColor(*p.sample), white),
        )
        for p in request.xyz_pairs or []
    ]


def handle_compute(request: ComputeRequest) -> ComputeResponse:
    formula = normalize_formula(request.formula)
    factors = ParametricFactors(request.factors.kl, request.factors.kc, request.factors.kh)
    pairs = _resolved_lab_pairs(request)
    rows: list[ComputeRow] = []
    if formula == "NS":
        if (factors.kl, factors.kc, factors.kh) != (1.0, 1.0, 1.0):
            raise DomainError("the no-separation formula has no parametric factor slots")
        for pair_id, reference, sample in pairs:
            result = delta_e_ns(reference, sample)
            b = result.breakdown
            rows.append(
                ComputeRow(
                    pair_id=pair_id,
                    de=result.de_ns,
                    de00=result.de00,
                    d_l=result.d_l,
                    dl_prime=b.dl_prime,
                    dc_prime=b.dc_prime,
                    dh_prime=b.dh_prime,
                    rt_term=b.rt_term,
                )
            )
        columns = _COLUMNS_NS
    elif formula == "CIEDE2000":
        for pair_id, reference, sample in pairs:
            b = delta_e_ciede2000(reference, sample, factors.kl, factors.kc, factors.kh)
            rows.append(
                ComputeRow(
                    pair_id=pair_id,
                    de=b.de00,
                    dl_prime=b.dl_prime,
                    dc_prime=b.dc_prime,
                    dh_prime=b.dh_prime,
                    rt_term=b.rt_term,
                )
            )
        columns = _COLUMNS_DE2000
    else:
        fn = formula_function(formula, factors)
        rows = [
            ComputeRow(pair_id=pair_id, de=fn(reference, sample))
            for pair_id, reference, sample in pairs
        ]
        columns = _COLUMNS_PLAIN
    return ComputeResponse(formula=formula, columns=list(columns), rows=rows)


def _aligned_vectors(
    assessments: list[AssessmentModel],
    predictions: list,
) -> tuple[list[float], list[float]]:
    records = [assessment_record_from_model(m) for m in assessments]
    panel = panel_mean_dv(records)
    predicted: dict[str, float] = {}
    for entry in predictions:
        if entry.pair_id in predicted:
            raise DataError(f"duplicate prediction for pair id {entry.pair_id!r}")
        predicted[entry.pair_id] = entry.de
    for record in records:
        if record.pair_id not in predicted:
            raise DataError(f"pair id mismatch: no prediction for {record.pair_id!r}")
    assessed_ids = set(panel)
    for pair_id in predicted:
        if pair_id not in assessed_ids:
            raise DataError(f"pair id mismatch: no assessment for {pair_id!r}")
    ordered = [pair_id for pair_id in predicted if pair_id in panel]
    return [panel[p] for p in ordered], [predicted[p] for p in ordered]


def handle_stress(request: StressRequest) -> StressResponse:
    if request.a is not None:
        report = stress(request.a, request.b or [])
    else:
        a, b = _aligned_vectors(request.assessments or [], request.predictions or [])
        report = stress(a, b)
    return StressResponse(stress=report.stress, f_scale=report.f_scale, n=report.n)


def handle_ftest(request: FTestRequest) -> FTestResponse:
    result = f_test(request.stress1, request.stress2, request.confidence, request.n1, request.n2)
    return FTestResponse(
        f_value=result.f_value,
        lower_crit=result.lower_crit,
        upper_crit=result.upper_crit,
        verdict=result.verdict,
        confidence=result.confidence,
        df1=result.df1,
        df2=result.df2,
    )


def _fit_model_from_ellipsoid(fit: EllipsoidFit, center_id: str, magnitude_label: float | None) -> EllipsoidFitModel:
    section = plane_ellipse(fit)
    return EllipsoidFitModel(
        center_id=center_id,
        center=(fit.center.l, fit.center.a, fit.center.b),
        magnitude_label=magnitude_label,
        k1=fit.k1,
        k2=fit.k2,
        k3=fit.k3,
        k4=fit.k4,
        k5=fit.k5,
        k6=fit.k6,
        fit_stress=fit.fit_stress,
        n_pairs=fit.n_pairs,
        ellipse=PlaneEllipseModel(
            semi_major=section.semi_major,
            semi_minor=section.semi_minor,
            theta_degrees=section.theta_degrees,
        ),
    )


def _dv_for_pairs(request: FitRequest, records: list[PairRecord]) -> list[float]:
    for pair_id in request.dv:
        if all(r.pair_id != pair_id for r in records):
            raise DataError(f"pair id mismatch: dv given for unknown pair {pair_id!r}")
    values = []
    for record in records:
        if record.pair_id not in request.dv:
            raise DataError(f"pair id mismatch: no dv for {record.pair_id!r}")
        values.append(request.dv[record.pair_id])
    return values


def _fit_ellipsoid_target(request: FitRequest) -> FitResponse:
    all_records = [pair_record_from_model(m) for m in request.pairs]
    known_ids = {r.pair_id for r in all_records}
    for pair_id in request.dv:
        if pair_id not in known_ids:
            raise DataError(f"pair id mismatch: dv given for unknown pair {pair_id!r}")
    if request.center_id is not None:
        records = [r for r in all_records if r.center_id == request.center_id]
        if not records:
            raise DataError(f"no pairs for center {request.center_id!r}")
        center_id = request.center_id
    else:
        records = all_records
        center_ids = {r.center_id for r in records}
        if len(center_ids) != 1:
            raise ConfigError("center_id: required when pairs span multiple centers")
        center_id = center_ids.pop()
    for record in records:
        if record.pair_id not in request.dv:
            raise DataError(f"pair id mismatch: no dv for {record.pair_id!r}")
    known = CENTER_INDEX.get(center_id)
    center_lab = known.lab if known is not None else records[0].reference

    def one_fit(subset: list[PairRecord]) -> EllipsoidFit:
        diffs = [
            (r.sample.a - r.reference.a, r.sample.b - r.reference.b, r.sample.l - r.reference.l)
            for r in subset
        ]
        dv = [request.dv[r.pair_id] for r in subset]
        return fit_ellipsoid(
            diffs,
            dv,
            center_lab,
            diameter_tol=request.tolerance,
            max_evaluations=request.max_evaluations,
        )

    if request.per_magnitude:
        labels = sorted({r.magnitude_label for r in records})
        fits = []
        for label in labels:
            subset = [r for r in records if r.magnitude_label == label]
            fits.append((one_fit(subset), label))
        models = [_fit_model_from_ellipsoid(fit, center_id, label) for fit, label in fits]
        total_evals = sum(fit.n_evaluations for fit, _ in fits)
        before = sum(fit.stress_before for fit, _ in fits) / len(fits)
        after = sum(fit.fit_stress for fit, _ in fits) / len(fits)
        return FitResponse(
            target="ellipsoid",
            parameters={},
            stress_before=before,
            stress_after=after,
            n_evaluations=total_evals,
            fits=models,
        )

    fit = one_fit(records)
    model = _fit_model_from_ellipsoid(fit, center_id, None)
    parameters = {f"k{i}": value for i, value in enumerate(fit.coefficients(), start=1)}
    return FitResponse(
        target="ellipsoid",
        parameters=parameters,
        stress_before=fit.stress_before,
        stress_after=fit.fit_stress,
        n_evaluations=fit.n_evaluations,
        fits=[model],
    )


def handle_fit(request: FitRequest) -> FitResponse:
    if request.target not in FIT_TARGETS:
        raise ConfigError(f"target: must be one of {FIT_TARGETS}, got {request.target!r}")
    if request.target == "ellipsoid":
        return _fit_ellipsoid_target(request)

    records = [pair_record_from_model(m) for m in request.pairs]
    dv = _dv_for_pairs(request, records)
    colors = [(r.reference, r.sample) for r in records]
    magnitudes = [r.magnitude_label for r in records]

    if request.target in ("kl", "klkc"):
        result = fit_parametric_factors(
            colors,
            dv,
            base=request.base,
            target="kl_only" if request.target == "kl" else "kl_kc",
        )
    elif request.target == "dl":
        result = fit_dl_line(colors, dv, magnitudes, base=request.base)
    elif request.target == "power":
        result = fit_power(colors, dv, base=request.base, kind="power_c")
    else:
        if (request.dl_a is None) != (request.dl_b is None):
            raise ConfigError("dl_a/dl_b: give both line coefficients or neither")
        coefficients = (request.dl_a, request.dl_b) if request.dl_a is not None else None
        result = fit_power(
            colors,
            dv,
            base=request.base,
            kind="magnitude_power_d",
            dl_coefficients=coefficients,
            magnitudes=magnitudes,
            mode=request.mode,
        )
    return FitResponse(
        target=request.target,
        base=result.base,
        parameters=result.parameters,
        stress_before=result.stress_before,
        stress_after=result.stress_after,
        n_evaluations=result.n_evaluations,
    )


def _resolve_centers(request: GenerateRequest) -> list[ColorCenter] | None:
    if request.centers is None:
        return None
    centers: list[ColorCenter] = []
    for entry in request.centers:
        if isinstance(entry, str):
            known = CENTER_INDEX.get(entry)
            if known is None:
                raise ConfigError(f"centers: unknown color center {entry!r}")
            centers.append(known)
        else:
            centers.append(ColorCenter(entry.id, entry.name or entry.id, LabColor(*entry.lab)))
    return centers


def handle_generate(request: GenerateRequest) -> GenerateResponse:
    centers = _resolve_centers(request)
    try:
        design = generate_design(centers, request.magnitudes)
    except DomainError as exc:
        raise ConfigError(f"magnitudes: {exc}") from None
    factors = (
        ParametricFactors(request.factors.kl, request.factors.kc, request.factors.kh)
        if request.factors is not None
        else None
    )
    try:
        records = synthesize_assessments(
            design,
            ground_truth=request.ground_truth,
            factors=factors,
            noise_sigma=request.noise_sigma,
            n_observers=request.n_observers,
            seed=request.seed,
            repeat_center_id=request.repeat_center_id,
        )
    except (DomainError, DataError) as exc:
        raise ConfigError(str(exc)) from None
    return GenerateResponse(
        pairs=[pair_model_from_record(p) for p in design.pairs],
        assessments=[assessment_model_from_record(r) for r in records],
    )


def handle_variability(request: VariabilityRequest) -> VariabilityResponse:
    records = [assessment_record_from_model(m) for m in request.assessments]
    pairs = [pair_record_from_model(m) for m in request.pairs] if request.pairs is not None else None
    report = observer_variability(records, pairs)
    return VariabilityResponse(
        inter=report.inter,
        intra=report.intra,
        inter_mean=report.inter_mean,
        intra_mean=report.intra_mean,
        by_center=report.by_center,
        by_plane=report.by_plane,
        by_magnitude={f"{key:g}": value for key, value in report.by_magnitude.items()},
    )


def handle_plot(request: PlotRequest) -> str:
    placements = []
    for model in request.fits:
        fit = EllipsoidFit(
            k1=model.k1,
            k2=model.k2,
            k3=model.k3,
            k4=model.k4,
            k5=model.k5,
            k6=model.k6,
            fit_stress=model.fit_stress,
            center=LabColor(*model.center),
            n_pairs=model.n_pairs,
        )
        placements.append(
            EllipsePlacement(
                center_a=model.center[1],
                center_b=model.center[2],
                ellipse=plane_ellipse(fit),
                label=model.center_id,
                magnitude_label=model.magnitude_label,
            )
        )
    return render_ellipses(placements)


def handle_coefficients() -> CoefficientsResponse:
    rows = [
        CoefficientRowModel(formula_id=row.formula_id, a=row.a, b=row.b, c=row.c, d=row.d)
        for row in registry_rows()
    ]
    return CoefficientsResponse(rows=rows)
