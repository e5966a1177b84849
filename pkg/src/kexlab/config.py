"""Experiment configuration: flat typed key=value text, hashed for provenance.

Unknown keys are rejected, every palette value must parse as an exact
rational, and the canonical serialization (sorted keys, normalized values)
is what the config hash covers — so identical configurations always hash
identically regardless of formatting in the source file.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path

from .circuit import Voltage
from .errors import ConfigInvalid
from .protocol import Palette
from .rational import format_rational, parse_rational

MODES = ("circuit", "expander-plain", "expander-modular")
COMPROMISES = ("none", "rs-before", "rs-after", "rs-and-authkey")
SEED_ENV_VAR = "KEXLAB_SEED"
MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    rounds: int
    seed: int
    palette_rs: Palette
    palette_ra: Palette | None
    palette_rb: Palette | None
    palette_ua: Palette | None
    palette_ub: Palette | None
    delta_ua: Voltage
    delta_ub: Voltage
    sigma_u: float
    sigma_i: float
    modulus: int | None
    inject_current: Fraction
    inject_rounds: frozenset[int] | None  # None = every round, when injecting
    compromise: str
    draw_margin: int
    defense_tolerance: Fraction
    tag_algo: str

    def effective_palette_ra(self) -> Palette:
        return self._effective(self.palette_ra)

    def effective_palette_rb(self) -> Palette:
        return self._effective(self.palette_rb)

    def _effective(self, palette: Palette | None) -> Palette:
        if palette is not None:
            return palette
        if self.mode == "expander-modular" and self.modulus is not None:
            return Palette(range(self.modulus))
        raise ConfigInvalid({"palette": "resistance palettes are required in this mode"})

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, seed=seed)

    def injecting(self) -> bool:
        return self.inject_current != 0

    def injection_applies(self, round_k: int) -> bool:
        if not self.injecting():
            return False
        return self.inject_rounds is None or round_k in self.inject_rounds


_DEFAULTS = {
    "mode": "circuit",
    "rounds": "1",
    "seed": "0",
    "delta_ua": "1",
    "delta_ub": "1",
    "sigma_u": "0",
    "sigma_i": "0",
    "modulus": "",
    "inject_current": "0",
    "inject_rounds": "",
    "compromise": "none",
    "draw_margin": "0",
    "defense_tolerance": "0",
    "tag_algo": "sha256",
    "palette_rs": "",
    "palette_ra": "",
    "palette_rb": "",
    "palette_ua": "",
    "palette_ub": "",
}


def _parse_values(raw: str) -> list[Fraction]:
    return [parse_rational(part) for part in raw.split(",") if part.strip()]


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse and validate; raises ConfigInvalid with per-field diagnostics."""
    raw = dict(_DEFAULTS)
    problems: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            problems[f"line {lineno}"] = f"expected 'key = value', got {stripped!r}"
            continue
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in _DEFAULTS:
            problems[key] = "unknown key"
            continue
        raw[key] = value.strip()
    if problems:
        raise ConfigInvalid(problems)
    return _build(raw)


def _build(raw: dict[str, str]) -> ExperimentConfig:
    problems: dict[str, str] = {}

    def palette_of(key: str, required: bool) -> Palette | None:
        if not raw[key]:
            if required:
                problems[key] = "required in this mode"
            return None
        try:
            return Palette(_parse_values(raw[key]))
        except (ValueError, ZeroDivisionError) as exc:
            problems[key] = str(exc)
            return None

    mode = raw["mode"]
    if mode not in MODES:
        problems["mode"] = f"must be one of {', '.join(MODES)}"
        mode = "circuit"

    try:
        rounds = int(raw["rounds"])
        if rounds < 0:
            problems["rounds"] = "must be >= 0"
    except ValueError:
        problems["rounds"] = "not an integer"
        rounds = 0

    try:
        seed = int(raw["seed"])
        if not 0 <= seed <= MAX_SEED:
            problems["seed"] = "must fit in 64 bits"
    except ValueError:
        problems["seed"] = "not an integer"
        seed = 0

    modulus = None
    if raw["modulus"]:
        try:
            modulus = int(raw["modulus"])
            if modulus < 2:
                problems["modulus"] = "must be >= 2"
        except ValueError:
            problems["modulus"] = "not an integer"
    if mode == "expander-modular" and modulus is None:
        problems["modulus"] = "required for expander-modular mode"

    circuit_mode = mode == "circuit"
    palette_rs = palette_of("palette_rs", required=True)
    palette_ra = palette_of("palette_ra", required=circuit_mode or mode == "expander-plain")
    palette_rb = palette_of("palette_rb", required=circuit_mode or mode == "expander-plain")
    palette_ua = palette_of("palette_ua", required=circuit_mode)
    palette_ub = palette_of("palette_ub", required=circuit_mode)

    if circuit_mode:
        for key, pal in (
            ("palette_rs", palette_rs),
            ("palette_ra", palette_ra),
            ("palette_rb", palette_rb),
        ):
            if pal is not None and pal.values[0] <= 0:
                problems[key] = "resistance values must be positive"

    if mode == "expander-modular" and modulus is not None:
        for key, pal in (("palette_rs", palette_rs), ("palette_ra", palette_ra), ("palette_rb", palette_rb)):
            if pal is not None and not all(
                v.denominator == 1 and 0 <= v < modulus for v in pal.values
            ):
                problems[key] = f"values must be integers in [0, {modulus})"

    def rational_of(key: str) -> Fraction:
        try:
            return parse_rational(raw[key])
        except (ValueError, ZeroDivisionError):
            problems[key] = "not a rational"
            return Fraction(0)

    delta_ua = rational_of("delta_ua")
    delta_ub = rational_of("delta_ub")
    if circuit_mode:
        if delta_ua == 0:
            problems.setdefault("delta_ua", "must be nonzero")
        if delta_ub == 0:
            problems.setdefault("delta_ub", "must be nonzero")

    def float_of(key: str) -> float:
        try:
            value = float(raw[key])
        except ValueError:
            problems[key] = "not a number"
            return 0.0
        if value < 0:
            problems[key] = "must be >= 0"
        return value

    sigma_u = float_of("sigma_u")
    sigma_i = float_of("sigma_i")

    inject_current = rational_of("inject_current")
    inject_rounds: frozenset[int] | None = None
    if raw["inject_rounds"]:
        try:
            inject_rounds = frozenset(
                int(p) for p in raw["inject_rounds"].split(",") if p.strip()
            )
        except ValueError:
            problems["inject_rounds"] = "not a list of integers"

    compromise = raw["compromise"]
    if compromise not in COMPROMISES:
        problems["compromise"] = f"must be one of {', '.join(COMPROMISES)}"

    try:
        draw_margin = int(raw["draw_margin"])
        if draw_margin < 0:
            problems["draw_margin"] = "must be >= 0"
    except ValueError:
        problems["draw_margin"] = "not an integer"
        draw_margin = 0

    defense_tolerance = rational_of("defense_tolerance")
    if defense_tolerance < 0:
        problems["defense_tolerance"] = "must be >= 0"

    tag_algo = raw["tag_algo"]
    if tag_algo not in hashlib.algorithms_available:
        problems["tag_algo"] = "unknown hash algorithm"

    if problems:
        raise ConfigInvalid(problems)

    return ExperimentConfig(
        mode=mode,
        rounds=rounds,
        seed=seed,
        palette_rs=palette_rs,  # type: ignore[arg-type]
        palette_ra=palette_ra,
        palette_rb=palette_rb,
        palette_ua=palette_ua,
        palette_ub=palette_ub,
        delta_ua=Voltage(delta_ua),
        delta_ub=Voltage(delta_ub),
        sigma_u=sigma_u,
        sigma_i=sigma_i,
        modulus=modulus,
        inject_current=inject_current,
        inject_rounds=inject_rounds,
        compromise=compromise,
        draw_margin=draw_margin,
        defense_tolerance=defense_tolerance,
        tag_algo=tag_algo,
    )


def load_config(path) -> ExperimentConfig:
    return parse_config_text(Path(path).read_text())


def canonical_text(config: ExperimentConfig) -> str:
    """Normalized key=value form; the basis of the config hash."""

    def palette_text(p: Palette | None) -> str:
        return "" if p is None else ",".join(format_rational(v) for v in p.values)

    items = {
        "mode": config.mode,
        "rounds": str(config.rounds),
        "seed": str(config.seed),
        "palette_rs": palette_text(config.palette_rs),
        "palette_ra": palette_text(config.palette_ra),
        "palette_rb": palette_text(config.palette_rb),
        "palette_ua": palette_text(config.palette_ua),
        "palette_ub": palette_text(config.palette_ub),
        "delta_ua": format_rational(config.delta_ua.value),
        "delta_ub": format_rational(config.delta_ub.value),
        "sigma_u": repr(config.sigma_u),
        "sigma_i": repr(config.sigma_i),
        "modulus": "" if config.modulus is None else str(config.modulus),
        "inject_current": format_rational(config.inject_current),
        "inject_rounds": ""
        if config.inject_rounds is None
        else ",".join(str(k) for k in sorted(config.inject_rounds)),
        "compromise": config.compromise,
        "draw_margin": str(config.draw_margin),
        "defense_tolerance": format_rational(config.defense_tolerance),
        "tag_algo": config.tag_algo,
    }
    return "".join(f"{k}={v}\n" for k, v in sorted(items.items()))


def config_hash(config: ExperimentConfig) -> str:
    return hashlib.sha256(canonical_text(config).encode("ascii")).hexdigest()


def load_palettes(path) -> tuple[Palette, Palette, Palette, int | None]:
    """Palette-only file for the analysis commands: crack and entropy.

    Accepts the same key=value syntax as full configs but requires only
    palette_rs, palette_ra, palette_rb (plus an optional modulus).
    """
    problems: dict[str, str] = {}
    found: dict[str, str] = {}
    allowed = {"palette_rs", "palette_ra", "palette_rb", "modulus"}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            problems[f"line {lineno}"] = f"expected 'key = value', got {stripped!r}"
            continue
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in allowed:
            problems[key] = "unknown key"
            continue
        found[key] = value.strip()
    modulus = None
    if found.get("modulus"):
        try:
            modulus = int(found["modulus"])
            if modulus < 2:
                problems["modulus"] = "must be >= 2"
        except ValueError:
            problems["modulus"] = "not an integer"
    palettes: dict[str, Palette] = {}
    for key in ("palette_rs", "palette_ra", "palette_rb"):
        raw_values = found.get(key, "")
        if not raw_values:
            if key == "palette_rs":
                problems[key] = "required"
            elif modulus is not None:
                palettes[key] = Palette(range(modulus))
            else:
                problems[key] = "required without a modulus"
            continue
        try:
            palettes[key] = Palette(_parse_values(raw_values))
        except (ValueError, ZeroDivisionError) as exc:
            problems[key] = str(exc)
    if problems:
        raise ConfigInvalid(problems)
    return palettes["palette_rs"], palettes["palette_ra"], palettes["palette_rb"], modulus


def resolve_seed(config: ExperimentConfig, override: int | None = None) -> int:
    """CLI seed beats the KEXLAB_SEED environment variable beats the file."""
    if override is not None:
        return override
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        return int(env)
    return config.seed


def derive_seed(master: int, *parts) -> int:
    """Stable 64-bit sub-seed for a labeled purpose under one master seed."""
    material = "kexlab:" + repr((master,) + parts)
    digest = hashlib.sha256(material.encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big")
