"""Colorimetry toolkit: color-difference formulas (including the
no-separation formula), STRESS statistics, discrimination-ellipsoid
fitting, parameter recovery, experiment-design generation and an
HTTP/CLI front end."""

from .color import (
    DEFAULT_WHITE,
    ColorPair,
    LabColor,
    WhitePoint,
    XyzColor,
    chroma_hue,
    pair_differences,
    xyz_to_lab,
)
from .corrections import (
    COEFFICIENT_TABLE,
    FormulaCoefficients,
    ParametricFactors,
    corrected_delta_e,
    crossover,
    formula_function,
    lightness_factor,
    parametric_delta_e,
    registry,
    registry_rows,
)
from .dataset import (
    CANONICAL_MAGNITUDES,
    CENTERS,
    ColorCenter,
    ExperimentDesign,
    PairRecord,
    generate_design,
    load_assessments,
    load_pairs,
    load_xyz_pairs,
    save_assessments,
    save_pairs,
    save_xyz_pairs,
    synthesize_assessments,
)
from .ellipse import (
    EllipsoidFit,
    PlaneEllipse,
    fit_ellipsoid,
    plane_ellipse,
    predicted_delta_e,
    scale_fit,
)
from .errors import (
    ConfigError,
    DataError,
    DeltansError,
    DomainError,
    FitError,
    GeometryError,
    ParseError,
    SchemaError,
    UnknownFormulaError,
    UnsupportedFormulaError,
)
from .formulas import (
    De2000Breakdown,
    FormulaComponents,
    NsResult,
    base_components,
    delta_e_cie94,
    delta_e_cielab,
    delta_e_ciede2000,
    delta_e_cmc,
    delta_e_ns,
    normalize_formula,
)
from .optimize import (
    FitResult,
    FitSpec,
    fit_dl_line,
    fit_parametric_factors,
    fit_power,
    minimize_stress,
)
from .stats import (
    AssessmentRecord,
    FTestResult,
    StressReport,
    VariabilityReport,
    dv_to_gs,
    f_test,
    gs_to_dv,
    mcdm,
    observer_variability,
    panel_mean_dv,
    stress,
)

__version__ = "1.0.0"

__all__ = [name for name in dir() if not name.startswith("_")]
