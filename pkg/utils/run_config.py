"""
Run configuration for SPROCKET experiments, loadable from and written to TOML.
"""
import math
import os
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, Optional, Tuple

import toml

from utils.apportion import largest_remainder
from utils.distances import (DEFAULT_PARAMS, ELASTIC_MEASURES, MEASURE_CODES,
                             DistanceMeasure)
from utils.errors import ConfigError, InvalidMeasure
from utils.prototypes import SelectionStrategy
from utils.random_stream import MAX_SEED

CHANNEL_MODES = ("independent", "single")

# kernel weights per measure for the named distance ensembles
DISTANCE_PRESETS: Dict[str, Tuple[Tuple[str, int], ...]] = {
    "top2": (("twe", 1), ("adtw", 1)),
    "top2e": (("twe", 1), ("adtw", 1), ("euclidean", 2)),
    "top4": (("twe", 1), ("adtw", 1), ("msm", 1), ("dtw", 1)),
    "top4e": (("twe", 1), ("adtw", 1), ("msm", 1), ("dtw", 1), ("euclidean", 4)),
    "elastic": tuple((m, 1) for m in ("twe", "adtw", "msm", "dtw", "erp", "wdtw")),
    "all": tuple((m, 1) for m in ("twe", "adtw", "msm", "dtw", "erp", "wdtw")) + (("euclidean", 6),),
}


def parse_window_rule(rule: str) -> Tuple[str, Optional[int]]:
    """
    Parse a window rule: "sqrt", "none" or "fixed:N".

    Args:
        rule: Rule text

    Returns:
        Tuple of (rule kind, fixed width or None)
    """
    text = str(rule).strip().lower()
    if text in ("sqrt", "none"):
        return text, None
    if text.startswith("fixed:"):
        try:
            width = int(text.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"invalid fixed window '{rule}'", option="window_rule")
        if width < 0:
            raise ConfigError("fixed window must be nonnegative", option="window_rule")
        return "fixed", width
    raise ConfigError(f"unknown window rule '{rule}' (use sqrt, none or fixed:N)",
                      option="window_rule")


def window_for(series_length: int, rule: str = "sqrt") -> Optional[int]:
    """
    Band half-width for a series length under a window rule.

    Args:
        series_length: Original series length l (not the activation length)
        rule: "sqrt" for floor(sqrt(l)), "none" for unconstrained, "fixed:N"

    Returns:
        Window width, or None when unconstrained
    """
    if int(series_length) < 1:
        raise ConfigError("series length must be positive", length=series_length)
    kind, width = parse_window_rule(rule)
    if kind == "none":
        return None
    if kind == "fixed":
        return width
    return math.isqrt(int(series_length))


def parse_distance_spec(text: str, kernel_count: Optional[int] = None) -> Tuple[Tuple[str, int], ...]:
    """
    Parse "msm:300,euclidean:300", a single measure name, or a preset name.

    A bare measure or a preset needs the kernel count to resolve its shares.

    Args:
        text: Distance specification
        kernel_count: Total kernel count K (needed for bare names)

    Returns:
        Tuple of (measure, kernel share) pairs
    """
    text = str(text).strip().lower()
    if not text:
        raise ConfigError("empty distance specification", option="distance_spec")
    if text in DISTANCE_PRESETS or text in MEASURE_CODES:
        if kernel_count is None:
            raise ConfigError(f"'{text}' needs a kernel count", option="distance_spec")
        return resolve_preset(text, kernel_count)
    pairs = []
    for part in text.split(","):
        if ":" not in part:
            raise ConfigError(f"distance share '{part}' must look like measure:count",
                              option="distance_spec")
        name, share = part.split(":", 1)
        try:
            pairs.append((name.strip(), int(share)))
        except ValueError:
            raise ConfigError(f"kernel share '{share}' is not an integer", option="distance_spec")
    return tuple(pairs)


def resolve_preset(name: str, kernel_count: int) -> Tuple[Tuple[str, int], ...]:
    """Apportion K kernels over a measure or a named distance ensemble."""
    name = name.lower()
    if name in MEASURE_CODES:
        return ((name, int(kernel_count)),)
    weights = DISTANCE_PRESETS[name]
    shares = largest_remainder([w for _, w in weights], int(kernel_count))
    return tuple((measure, share) for (measure, _), share in zip(weights, shares))


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a SPROCKET run; immutable once validated."""

    kernel_count: int = 512
    prototype_log_base: float = 4.0
    window_rule: str = "sqrt"
    distance_spec: Tuple[Tuple[str, int], ...] = ()
    selection: str = "uniform_random"
    seed: int = 0
    thread_count: int = field(default_factory=lambda: os.cpu_count() or 1)
    channel_mode: str = "independent"
    normalize_input: bool = False
    normalize_activations: bool = False
    standardize_features: bool = True
    alphas: Tuple[float, ...] = (0.1, 1.0, 10.0)
    measure_params: Dict[str, Dict[str, float]] = field(default_factory=dict)

    def __post_init__(self):
        if int(self.kernel_count) < 1:
            raise ConfigError("kernel count must be positive", option="kernel_count",
                              value=self.kernel_count)
        object.__setattr__(self, "kernel_count", int(self.kernel_count))

        if not float(self.prototype_log_base) > 1:
            raise ConfigError("prototype log base must be greater than 1",
                              option="prototype_log_base", value=self.prototype_log_base)
        object.__setattr__(self, "prototype_log_base", float(self.prototype_log_base))

        parse_window_rule(self.window_rule)

        spec = self.distance_spec or (("msm", self.kernel_count),)
        if isinstance(spec, str):
            spec = parse_distance_spec(spec, self.kernel_count)
        spec = tuple((str(m).lower(), int(s)) for m, s in spec)
        for measure, share in spec:
            if measure not in MEASURE_CODES:
                raise ConfigError(f"unknown distance measure '{measure}'", option="distance_spec")
            if share < 1:
                raise ConfigError("every kernel share must be at least 1", option="distance_spec",
                                  measure=measure, share=share)
        if sum(s for _, s in spec) != self.kernel_count:
            raise ConfigError("kernel shares must sum to the kernel count", option="distance_spec",
                              shares=sum(s for _, s in spec), kernel_count=self.kernel_count)
        object.__setattr__(self, "distance_spec", spec)

        try:
            object.__setattr__(self, "selection", SelectionStrategy(self.selection).kind)
        except ValueError as e:
            raise ConfigError(str(e), option="selection")

        if not 0 <= int(self.seed) <= MAX_SEED:
            raise ConfigError("seed must be a 64-bit unsigned integer", option="seed", value=self.seed)
        object.__setattr__(self, "seed", int(self.seed))

        if int(self.thread_count) < 1:
            raise ConfigError("thread count must be positive", option="thread_count",
                              value=self.thread_count)
        object.__setattr__(self, "thread_count", int(self.thread_count))

        if self.channel_mode not in CHANNEL_MODES:
            raise ConfigError(f"channel mode must be one of {CHANNEL_MODES}", option="channel_mode")

        alphas = tuple(float(a) for a in self.alphas)
        if not alphas or any(not (a > 0 and math.isfinite(a)) for a in alphas):
            raise ConfigError("alphas must be positive and finite", option="alphas")
        object.__setattr__(self, "alphas", alphas)

        params = {str(k).lower(): dict(v) for k, v in (self.measure_params or {}).items()}
        for measure, values in params.items():
            try:
                DistanceMeasure(measure, values)
            except InvalidMeasure as e:
                raise ConfigError(e.message, option="measure_params", measure=measure)
        object.__setattr__(self, "measure_params", params)

    # -- derived values ---------------------------------------------------------

    def window_for_length(self, series_length: int) -> Optional[int]:
        return window_for(series_length, self.window_rule)

    def measure(self, kind: str, series_length: int) -> DistanceMeasure:
        return DistanceMeasure(kind, self.measure_params.get(kind, {}),
                               self.window_for_length(series_length))

    def kernel_measures(self) -> Tuple[str, ...]:
        """Measure name for every kernel, in kernel order."""
        names = []
        for measure, share in self.distance_spec:
            names.extend([measure] * share)
        return tuple(names)

    @property
    def elastic_share(self) -> int:
        return sum(s for m, s in self.distance_spec if m in ELASTIC_MEASURES)

    def with_overrides(self, **changes) -> "RunConfig":
        """
        Copy with some fields replaced; a new kernel count rescales single-measure specs.

        Args:
            **changes: Field values to replace

        Returns:
            New validated RunConfig
        """
        changes = {k: v for k, v in changes.items() if v is not None}
        if "kernel_count" in changes and "distance_spec" not in changes:
            if len(self.distance_spec) == 1:
                changes["distance_spec"] = ((self.distance_spec[0][0], int(changes["kernel_count"])),)
            else:
                weights = [s for _, s in self.distance_spec]
                shares = largest_remainder(weights, int(changes["kernel_count"]))
                changes["distance_spec"] = tuple(
                    (m, s) for (m, _), s in zip(self.distance_spec, shares))
        return replace(self, **changes)

    # -- serialization ----------------------------------------------------------

    def to_dict(self) -> dict:
        """Fully resolved configuration, every default written out."""
        data = asdict(self)
        data["distance_spec"] = [{"measure": m, "kernels": s} for m, s in self.distance_spec]
        data["alphas"] = list(self.alphas)
        data["seed"] = str(self.seed)
        params = {m: dict(DEFAULT_PARAMS.get(m, {})) for m, _ in self.distance_spec}
        for m, values in self.measure_params.items():
            params.setdefault(m, {}).update(values)
        data["measure_params"] = {m: v for m, v in params.items() if v}
        data["resolved_windows"] = "window computed per dataset from the series length"
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        data.pop("resolved_windows", None)
        known = {f for f in cls.__dataclass_fields__}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}", keys=unknown)
        spec = data.get("distance_spec")
        if isinstance(spec, list):
            data["distance_spec"] = tuple(
                (entry["measure"], entry["kernels"]) if isinstance(entry, dict) else tuple(entry)
                for entry in spec)
        if "alphas" in data:
            data["alphas"] = tuple(data["alphas"])
        if "seed" in data:
            data["seed"] = int(data["seed"])
        return cls(**data)

    def to_toml(self, path: Optional[str] = None) -> str:
        """
        Render the configuration as TOML, optionally writing it to a file.

        Args:
            path: Output path (optional)

        Returns:
            TOML text
        """
        text = toml.dumps(self.to_dict())
        if path:
            directory = os.path.dirname(path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(path, "w") as f:
                f.write(text)
        return text

    @classmethod
    def from_toml(cls, path: str) -> "RunConfig":
        try:
            with open(path, "r") as f:
                data = toml.load(f)
        except (OSError, toml.TomlDecodeError) as e:
            raise ConfigError(f"Error reading configuration: {e}", path=path)
        return cls.from_dict(data.get("run", data))


def config_from_measure(distance: str = "msm", kernel_count: int = 512, **kwargs) -> RunConfig:
    return RunConfig(kernel_count=kernel_count,
                     distance_spec=parse_distance_spec(distance, kernel_count), **kwargs)
