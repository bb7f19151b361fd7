"""
Run Configuration

Flat ``key = value`` files with ``#`` comments, overridden by command-line
flags. Every key is parsed and range-checked on the way in; unknown keys are
rejected.
"""

from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

from config import (
    COORDINATE_SYSTEMS,
    DEFAULT_COARSE_N,
    DEFAULT_COARSE_STEPS,
    DEFAULT_CORRECTION_OMEGA,
    DEFAULT_CYCLE,
    DEFAULT_LEVELS,
    DEFAULT_MAX_CYCLES,
    DEFAULT_OMEGA,
    DEFAULT_POST_STEPS,
    DEFAULT_PRE_STEPS,
    DEFAULT_PROBE_ITERATIONS,
    DEFAULT_SMOOTHER,
    DEFAULT_TOL,
    MAX_GRADING,
    SMOOTHER_KINDS,
    START_STRATEGIES,
    STUDY_AXES,
)
from src.errors import ConfigError
from src.mesh import (
    CoordinateSystem,
    GradingSpec,
    GridHierarchy,
    axis_extents,
    build_hierarchy,
    graded_nodes,
    level_size,
)
from src.mgcycle import CycleSpec
from src.smoother import SmootherSpec
from src.stencil import AnisotropySpec
from src.validation import (
    validate_choice,
    validate_grading_factor,
    validate_int_at_least,
    validate_output_path,
    validate_positive_real,
    validate_smoother_omega,
)


@dataclass
class RunConfig:
    levels: int = DEFAULT_LEVELS
    coarse_n: Tuple[int, int] = DEFAULT_COARSE_N
    grading_x: float = 1.0
    grading_y: float = 1.0
    coords: str = "cartesian"
    alpha: float = 1.0
    beta: float = 1.0
    smoother: str = DEFAULT_SMOOTHER
    omega: float = DEFAULT_OMEGA
    smoother_omega: Optional[float] = None
    cycle: str = DEFAULT_CYCLE
    pre_steps: int = DEFAULT_PRE_STEPS
    post_steps: int = DEFAULT_POST_STEPS
    correction_omega: Union[float, str] = DEFAULT_CORRECTION_OMEGA
    tol: float = DEFAULT_TOL
    max_cycles: int = DEFAULT_MAX_CYCLES
    start: str = "zero"
    sweep: Optional[str] = None
    values: List[str] = field(default_factory=list)
    out: Optional[str] = None
    coarse_solver: str = "direct"
    coarse_steps: int = DEFAULT_COARSE_STEPS
    timing: bool = False
    probe_iterations: int = DEFAULT_PROBE_ITERATIONS
    seed: int = 0

    def grading(self) -> GradingSpec:
        return GradingSpec(self.grading_x, self.grading_y)

    def anisotropy(self) -> AnisotropySpec:
        return AnisotropySpec(self.alpha, self.beta)

    def coordinate_system(self) -> CoordinateSystem:
        return CoordinateSystem(self.coords)

    def hierarchy(self) -> GridHierarchy:
        return build_hierarchy(self.levels, self.coarse_n, self.grading(), self.coordinate_system())

    def smoother_spec(self) -> SmootherSpec:
        return SmootherSpec(self.smoother, self.smoother_omega)

    def cycle_spec(self) -> CycleSpec:
        return CycleSpec(
            cycle=self.cycle,
            pre_steps=self.pre_steps,
            post_steps=self.post_steps,
            correction_omega=self.correction_omega,
            smoother=self.smoother_spec(),
            omega=self.omega,
            tolerance=self.tol,
            max_cycles=self.max_cycles,
            coarse_solver=self.coarse_solver,
            coarse_steps=self.coarse_steps,
        )

    def with_value(self, key: str, value) -> "RunConfig":
        return replace(self, **{key: value})

    def as_dict(self) -> Dict[str, object]:
        settings = asdict(self)
        settings["coarse_n"] = format_coarse_n(self.coarse_n)
        settings["values"] = ",".join(self.values) if self.values else None
        return settings


def format_coarse_n(coarse_n: Tuple[int, int]) -> str:
    nx, ny = coarse_n
    return str(nx) if nx == ny else f"{nx},{ny}"


# --- value parsers -----------------------------------------------------------

def _checked(key: str, result: Tuple[bool, str]):
    is_valid, message = result
    if not is_valid:
        raise ConfigError(key, message)


def _parse_int(key: str, text: str, minimum: int) -> int:
    try:
        value = int(text)
    except ValueError:
        raise ConfigError(key, f"must be an integer (got {text!r})") from None
    _checked(key, validate_int_at_least(value, minimum))
    return value


def _parse_positive(key: str, text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(key, f"must be a number (got {text!r})") from None
    _checked(key, validate_positive_real(value))
    return value


def _parse_grading(key: str, text: str) -> float:
    value = _parse_positive(key, text)
    _checked(key, validate_grading_factor(value, MAX_GRADING))
    return value


def _parse_choice(key: str, text: str, choices) -> str:
    value = text.strip()
    _checked(key, validate_choice(value, choices))
    return value


def _parse_coarse_n(key: str, text: str) -> Tuple[int, int]:
    parts = [part.strip() for part in text.split(",")]
    if len(parts) == 1:
        n = _parse_int(key, parts[0], 1)
        return n, n
    if len(parts) == 2:
        return _parse_int(key, parts[0], 1), _parse_int(key, parts[1], 1)
    raise ConfigError(key, f"expected 'n' or 'nx,ny' (got {text!r})")


def _parse_correction_omega(key: str, text: str) -> Union[float, str]:
    if text.strip().lower() == "adaptive":
        return "adaptive"
    return _parse_positive(key, text)


def _parse_smoother_omega(key: str, text: str) -> Optional[float]:
    if text.strip().lower() in ("", "default", "none"):
        return None
    return _parse_positive(key, text)


def _parse_bool(key: str, text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ConfigError(key, f"must be true or false (got {text!r})")


def _parse_values(key: str, text: str) -> List[str]:
    values = [part.strip() for part in text.split(",") if part.strip()]
    if not values:
        raise ConfigError(key, "must be a nonempty comma-separated list")
    return values


def _parse_out(key: str, text: str) -> str:
    _checked(key, validate_output_path(text))
    return text


Parser = Callable[[str, str], object]

# key -> (parser, range shown in --help)
CONFIG_KEYS: Dict[str, Tuple[Parser, str]] = {
    "levels": (lambda k, t: _parse_int(k, t, 1), "integer >= 1"),
    "coarse_n": (_parse_coarse_n, "n or nx,ny, integers >= 1"),
    "grading_x": (_parse_grading, f"real in [{1 / MAX_GRADING:g}, {MAX_GRADING:g}], 1 = equidistant"),
    "grading_y": (_parse_grading, f"real in [{1 / MAX_GRADING:g}, {MAX_GRADING:g}], 1 = equidistant"),
    "coords": (lambda k, t: _parse_choice(k, t, COORDINATE_SYSTEMS), "|".join(COORDINATE_SYSTEMS)),
    "alpha": (_parse_positive, "real > 0"),
    "beta": (_parse_positive, "real > 0"),
    "smoother": (lambda k, t: _parse_choice(k, t, SMOOTHER_KINDS), "|".join(SMOOTHER_KINDS)),
    "omega": (_parse_positive, "real > 0, outer smoothing damping"),
    "smoother_omega": (
        _parse_smoother_omega,
        "real > 0; gauss_seidel/sor < 2; tri/adi/gstri/gsadi <= 1; default per smoother",
    ),
    "cycle": (lambda k, t: _parse_choice(k, t.strip().upper(), ["V", "W", "F"]), "V|W|F"),
    "pre_steps": (lambda k, t: _parse_int(k, t, 0), "integer >= 0"),
    "post_steps": (lambda k, t: _parse_int(k, t, 0), "integer >= 0"),
    "correction_omega": (_parse_correction_omega, "real > 0 or 'adaptive'"),
    "tol": (_parse_positive, "real > 0, relative residual target"),
    "max_cycles": (lambda k, t: _parse_int(k, t, 1), "integer >= 1"),
    "start": (lambda k, t: _parse_choice(k, t, START_STRATEGIES), "|".join(START_STRATEGIES)),
    "sweep": (lambda k, t: _parse_choice(k, t, STUDY_AXES), "|".join(STUDY_AXES)),
    "values": (_parse_values, "comma-separated sweep values"),
    "out": (_parse_out, "writable file path"),
    "coarse_solver": (lambda k, t: _parse_choice(k, t, ["direct", "smoother"]), "direct|smoother"),
    "coarse_steps": (lambda k, t: _parse_int(k, t, 1), "integer >= 1"),
    "timing": (_parse_bool, "true|false"),
    "probe_iterations": (lambda k, t: _parse_int(k, t, 10), "integer >= 10"),
    "seed": (lambda k, t: _parse_int(k, t, 0), "integer >= 0"),
}


def parse_value(key: str, text: str):
    if key not in CONFIG_KEYS:
        raise ConfigError(key, "unknown configuration key")
    parser, _ = CONFIG_KEYS[key]
    return parser(key, str(text))


def read_config_file(path: str) -> Dict[str, str]:
    """
    Raw ``key = value`` pairs of a config file.

    Raises ConfigError for unreadable files, malformed lines and unknown keys.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError("config", f"cannot read {path}: {e}") from e

    pairs: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("config", f"line {number} is not 'key = value': {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(key, f"unknown configuration key (line {number})")
        pairs[key] = value
    return pairs


def check_consistency(config: RunConfig):
    _checked("smoother_omega", validate_smoother_omega(config.smoother, config.smoother_omega))
    if config.pre_steps + config.post_steps < 1:
        raise ConfigError("pre_steps", "pre_steps + post_steps must be >= 1")

    # Graded nodes must stay distinct on the finest grid of the physical axis
    x_extent, y_extent = axis_extents(config.coordinate_system())
    axes = (
        ("grading_x", config.grading_x, config.coarse_n[0], x_extent),
        ("grading_y", config.grading_y, config.coarse_n[1], y_extent),
    )
    for key, factor, coarse, extent in axes:
        n = level_size(config.levels, coarse)
        try:
            graded_nodes(n, factor, extent)
        except ValueError as e:
            raise ConfigError(
                key, f"{factor:g} merges neighbouring nodes of the {n}-point finest axis (levels = {config.levels})"
            ) from e


def load_run_config(config_path: Optional[str] = None, overrides: Optional[Dict[str, str]] = None) -> RunConfig:
    """
    Defaults, then the config file, then flag overrides (raw strings).
    """
    raw: Dict[str, str] = {}
    if config_path:
        raw.update(read_config_file(config_path))
    if overrides:
        raw.update({key: value for key, value in overrides.items() if value is not None})

    config = RunConfig()
    for key, text in raw.items():
        setattr(config, key, parse_value(key, text))

    check_consistency(config)
    return config
