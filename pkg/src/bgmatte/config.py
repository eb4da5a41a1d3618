"""Pipeline configuration: a flat ``section.key = value`` text format.

One schema table drives everything: parsing, validation, defaults, and
the effective-config echo written next to outputs.  Strings are double
quoted, booleans are ``true``/``false``, and coordinate or color values
are comma-separated floats.  Unknown keys are rejected so typos fail
loudly instead of silently running with defaults.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .synth import SynthConfig

__all__ = ["ConfigError", "PipelineConfig", "load_config", "save_config", "to_synth_config"]


class ConfigError(ValueError):
    """Raised for unparsable, unknown, or out-of-range configuration."""


def _unit(value) -> bool:
    return 0.0 <= value <= 1.0


def _positive(value) -> bool:
    return value > 0


def _non_negative(value) -> bool:
    return value >= 0


def _color(value) -> bool:
    return all(0.0 <= v <= 1.0 for v in value)


@dataclass(frozen=True)
class _Key:
    name: str            # file key, e.g. "prm.xi"
    attr: str            # PipelineConfig attribute, e.g. "prm_xi"
    kind: str            # str | bool | int | float | float2 | float3
    check: object = None         # predicate on the parsed value
    requirement: str = ""        # human-readable range, used in errors


_SCHEMA = (
    _Key("predictor", "predictor", "str", lambda s: bool(s), "must be non-empty"),
    _Key("semantic.theta", "semantic_theta", "float", _unit, "must be in [0, 1]"),
    _Key("semantic.sigma", "semantic_sigma", "float", _positive, "must be > 0"),
    _Key("semantic.bootstrap", "semantic_bootstrap", "float", _unit, "must be in [0, 1]"),
    _Key("band.lo", "band_lo", "float", _unit, "must be in [0, 1]"),
    _Key("band.hi", "band_hi", "float", _unit, "must be in [0, 1]"),
    _Key("band.radius", "band_radius", "int", _non_negative, "must be >= 0"),
    _Key("detail.fg_threshold", "detail_fg_threshold", "float",
         lambda v: 0.0 < v <= 1.0, "must be in (0, 1]"),
    _Key("detail.delta", "detail_delta", "float", _positive, "must be > 0"),
    _Key("prm.xi", "prm_xi", "float", _unit, "must be in [0, 1]"),
    _Key("prm.cap", "prm_cap", "float", _unit, "must be in [0, 1]"),
    _Key("prm.halo", "prm_halo", "int", _non_negative, "must be >= 0"),
    _Key("prm.force_k", "prm_force_k", "int", _non_negative, "must be >= 0 (0 disables)"),
    _Key("ofd.enabled", "ofd_enabled", "bool"),
    _Key("ofd.close_tol", "ofd_close_tol", "float", _non_negative, "must be >= 0"),
    _Key("ofd.flicker_tol", "ofd_flicker_tol", "float", _non_negative, "must be >= 0"),
    _Key("losses.eps", "losses_eps", "float", _positive, "must be > 0"),
    _Key("losses.gamma_radius", "losses_gamma_radius", "int", _non_negative, "must be >= 0"),
    _Key("synth.width", "synth_width", "int", lambda v: v >= 8, "must be >= 8"),
    _Key("synth.height", "synth_height", "int", lambda v: v >= 8, "must be >= 8"),
    _Key("synth.clip_length", "synth_clip_length", "int", _positive, "must be >= 1"),
    _Key("synth.seed", "synth_seed", "int", _non_negative, "must be >= 0"),
    _Key("synth.bg_color_a", "synth_bg_color_a", "float3", _color, "must be in [0, 1]"),
    _Key("synth.bg_color_b", "synth_bg_color_b", "float3", _color, "must be in [0, 1]"),
    _Key("synth.bg_velocity", "synth_bg_velocity", "float2"),
    _Key("synth.bg_jitter", "synth_bg_jitter", "float", _non_negative, "must be >= 0"),
    _Key("synth.bg_rotation", "synth_bg_rotation", "float"),
    _Key("synth.bg_scale_rate", "synth_bg_scale_rate", "float"),
    _Key("synth.fg_shape", "synth_fg_shape", "str",
         lambda s: s in ("disc", "capsule"), "must be 'disc' or 'capsule'"),
    _Key("synth.fg_radius", "synth_fg_radius", "float", _non_negative, "must be >= 0"),
    _Key("synth.fg_feather", "synth_fg_feather", "float", _non_negative, "must be >= 0"),
    _Key("synth.fg_color", "synth_fg_color", "float3", _color, "must be in [0, 1]"),
    _Key("synth.fg_start", "synth_fg_start", "float2"),
    _Key("synth.fg_velocity", "synth_fg_velocity", "float2"),
    _Key("synth.fg_axis", "synth_fg_axis", "float2"),
    _Key("synth.fg_enter_frame", "synth_fg_enter_frame", "int", _positive, "must be >= 1"),
    _Key("synth.fan_out", "synth_fan_out", "int", _positive, "must be >= 1"),
    _Key("io.input", "io_input", "str"),
    _Key("io.output", "io_output", "str"),
    _Key("io.truth", "io_truth", "str"),
    _Key("io.semantic", "io_semantic", "str"),
)

_BY_NAME = {key.name: key for key in _SCHEMA}
_BY_ATTR = {key.attr: key for key in _SCHEMA}


@dataclass(frozen=True)
class PipelineConfig:
    """Every tunable of the pipeline, with its documented default.

    Attribute names mirror the file keys with the dot replaced by an
    underscore (``prm.xi`` -> ``prm_xi``).  Values are validated on
    construction, so a config object is valid by existence.
    """

    predictor: str = "classical"
    semantic_theta: float = 0.1
    semantic_sigma: float = 0.02
    semantic_bootstrap: float = 0.0
    band_lo: float = 0.05
    band_hi: float = 0.95
    band_radius: int = 2
    detail_fg_threshold: float = 0.95
    detail_delta: float = 1e-4
    prm_xi: float = 0.01
    prm_cap: float = 0.15
    prm_halo: int = 8
    prm_force_k: int = 0
    ofd_enabled: bool = False
    ofd_close_tol: float = 0.1
    ofd_flicker_tol: float = 0.3
    losses_eps: float = 1e-6
    losses_gamma_radius: int = 2
    synth_width: int = 256
    synth_height: int = 256
    synth_clip_length: int = 10
    synth_seed: int = 1
    synth_bg_color_a: tuple = (0.15, 0.2, 0.45)
    synth_bg_color_b: tuple = (0.6, 0.55, 0.3)
    synth_bg_velocity: tuple = (0.5, 0.25)
    synth_bg_jitter: float = 0.25
    synth_bg_rotation: float = 0.0015
    synth_bg_scale_rate: float = 0.0
    synth_fg_shape: str = "disc"
    synth_fg_radius: float = 56.0
    synth_fg_feather: float = 3.0
    synth_fg_color: tuple = (0.95, 0.9, 0.1)
    synth_fg_start: tuple = (0.3, 0.5)
    synth_fg_velocity: tuple = (3.0, 0.0)
    synth_fg_axis: tuple = (0.0, 30.0)
    synth_fg_enter_frame: int = 1
    synth_fan_out: int = 1
    io_input: str = ""
    io_output: str = ""
    io_truth: str = ""
    io_semantic: str = ""

    def __post_init__(self):
        for key in _SCHEMA:
            value = getattr(self, key.attr)
            if key.kind in ("float2", "float3"):
                value = tuple(float(v) for v in value)
                n = 2 if key.kind == "float2" else 3
                if len(value) != n:
                    raise ConfigError(f"{key.name} must have {n} values")
                object.__setattr__(self, key.attr, value)
            if key.check is not None and not key.check(value):
                raise ConfigError(f"{key.name} {key.requirement}, got {value!r}")
        if not self.band_lo < self.band_hi:
            raise ConfigError(
                f"band.lo must be < band.hi, got {self.band_lo} and {self.band_hi}"
            )


def _parse_scalar(kind: str, raw: str):
    if kind == "str":
        if len(raw) < 2 or raw[0] != '"' or raw[-1] != '"':
            raise ValueError("expected a double-quoted string")
        inner = raw[1:-1]
        if '"' in inner:
            raise ValueError("embedded quotes are not supported")
        return inner
    if kind == "bool":
        lowered = raw.lower()
        if lowered not in ("true", "false"):
            raise ValueError("expected true or false")
        return lowered == "true"
    if kind == "int":
        return int(raw)
    if kind == "float":
        value = float(raw)
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError("expected a finite number")
        return value
    n = 2 if kind == "float2" else 3
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != n:
        raise ValueError(f"expected {n} comma-separated numbers")
    return tuple(float(p) for p in parts)


def _strip_comment(line: str) -> str:
    out = []
    quoted = False
    for ch in line:
        if ch == '"':
            quoted = not quoted
        if ch == "#" and not quoted:
            break
        out.append(ch)
    return "".join(out)


def parse_config(text: str, where: str = "<config>") -> PipelineConfig:
    """Parse config text into a validated :class:`PipelineConfig`.

    Raises
    ------
    ConfigError
        On malformed lines or unknown keys (with ``where:line``), or on
        out-of-range values (naming the offending key).
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = _strip_comment(line).strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{where}:{lineno}: expected 'key = value', got {line.strip()!r}")
        name, _, raw = body.partition("=")
        name = name.strip()
        raw = raw.strip()
        key = _BY_NAME.get(name)
        if key is None:
            raise ConfigError(f"{where}:{lineno}: unknown key {name!r}")
        if key.attr in values:
            raise ConfigError(f"{where}:{lineno}: duplicate key {name!r}")
        try:
            values[key.attr] = _parse_scalar(key.kind, raw)
        except ValueError as exc:
            raise ConfigError(f"{where}:{lineno}: bad value for {name}: {exc}") from None
    return PipelineConfig(**values)


def load_config(path) -> PipelineConfig:
    """Load a config file; missing keys take their documented defaults."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), where=str(path))


def _format_scalar(kind: str, value) -> str:
    if kind == "str":
        if '"' in value or "\n" in value:
            raise ConfigError(f"cannot serialize string containing quotes: {value!r}")
        return f'"{value}"'
    if kind == "bool":
        return "true" if value else "false"
    if kind == "int":
        return str(value)
    if kind == "float":
        return repr(float(value))
    return ", ".join(repr(float(v)) for v in value)


def save_config(config: PipelineConfig, path) -> None:
    """Write the complete effective config; ``load_config`` inverts it."""
    lines = []
    section = None
    for key in _SCHEMA:
        head = key.name.split(".")[0] if "." in key.name else ""
        if head != section:
            if lines:
                lines.append("")
            section = head
        value = getattr(config, key.attr)
        lines.append(f"{key.name} = {_format_scalar(key.kind, value)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def to_synth_config(config: PipelineConfig, seed: int | None = None) -> SynthConfig:
    """Project the ``synth.*`` keys onto a clip recipe.

    An explicit ``seed`` overrides ``synth.seed`` (the CLI's ``--seed``).
    """
    return SynthConfig(
        width=config.synth_width,
        height=config.synth_height,
        clip_length=config.synth_clip_length,
        seed=config.synth_seed if seed is None else seed,
        bg_color_a=config.synth_bg_color_a,
        bg_color_b=config.synth_bg_color_b,
        bg_velocity=config.synth_bg_velocity,
        bg_jitter=config.synth_bg_jitter,
        bg_rotation=config.synth_bg_rotation,
        bg_scale_rate=config.synth_bg_scale_rate,
        fg_shape=config.synth_fg_shape,
        fg_radius=config.synth_fg_radius,
        fg_feather=config.synth_fg_feather,
        fg_color=config.synth_fg_color,
        fg_start=config.synth_fg_start,
        fg_velocity=config.synth_fg_velocity,
        fg_axis=config.synth_fg_axis,
        fg_enter_frame=config.synth_fg_enter_frame,
    )


def describe_keys() -> tuple[str, ...]:
    """All recognized file keys, in echo order."""
    return tuple(key.name for key in _SCHEMA)


def replace(config: PipelineConfig, **overrides) -> PipelineConfig:
    """Return a copy with attribute overrides, re-validated."""
    unknown = set(overrides) - set(_BY_ATTR)
    if unknown:
        raise ConfigError(f"unknown config attributes: {sorted(unknown)}")
    return dataclasses.replace(config, **overrides)
