"""Flat ``key = value`` run configuration.

Lines are ``key = value``; ``#`` starts a comment; lists are comma
separated (``radii = 0.5, 0.75, 1.0``). Finite-mode coefficients use
``modes = k ell c0 c1 ...; k ell c0 ...`` (monomial coefficients in t = r^2).

General-knot files hold one line per mode, ``k, ell, r_0, ..., r_{N-1}``;
a line ``*, *, r_0, ...`` sets the knots of every unlisted mode.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from polyharm.errors import ConfigError
from polyharm.harmonics import DEFAULT_MAX_DEGREE
from polyharm.interp import MAX_ORDER, KnotSet

FUNCTIONS = ("constant", "zero", "gaussian", "exp-linear", "finite-mode", "example-geometric", "samples")


@dataclass
class RunConfig:
    n: int = 3
    R: float = 1.0
    N: int = 2
    k_max: int = 8
    exactness: Optional[int] = None
    knots: str = "spheres"
    radii: List[float] = field(default_factory=lambda: [0.5, 1.0])
    knots_file: Optional[str] = None
    function: str = "gaussian"
    value: float = 1.0
    center: Optional[List[float]] = None
    scale: float = 1.0
    direction: Optional[List[float]] = None
    modes: Dict[Tuple[int, int], List[float]] = field(default_factory=dict)
    C: float = 1.5
    samples_file: Optional[str] = None
    n_cheb: int = 32
    k_tail: Optional[int] = None
    probes: int = 41
    random_probes: int = 0
    seed: int = 0
    all_ell: bool = False
    growth_threshold: float = 1e6
    source: Optional[str] = None

    @property
    def quadrature_exactness(self) -> int:
        return self.exactness if self.exactness is not None else 2 * self.k_max + 4

    def echo(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            if f.name == "source":
                continue
            v = getattr(self, f.name)
            if f.name == "modes":
                v = {f"{k},{ell}": list(c) for (k, ell), c in sorted(v.items())}
            out[f.name] = v
        return out

    def validate(self) -> "RunConfig":
        where = self.source or "<config>"
        if self.n not in (2, 3):
            raise ConfigError(f"{where}: field 'n': must be 2 or 3, got {self.n}")
        if not self.R > 0:
            raise ConfigError(f"{where}: field 'R': must be positive, got {self.R}")
        if not 1 <= self.N <= MAX_ORDER:
            raise ConfigError(f"{where}: field 'N': must lie in 1..{MAX_ORDER}, got {self.N}")
        if not 0 <= self.k_max <= DEFAULT_MAX_DEGREE:
            raise ConfigError(f"{where}: field 'k_max': must lie in 0..{DEFAULT_MAX_DEGREE}, got {self.k_max}")
        if self.quadrature_exactness < 2 * self.k_max:
            raise ConfigError(f"{where}: field 'exactness': must be >= 2*k_max = {2 * self.k_max}")
        if self.knots not in ("spheres", "general"):
            raise ConfigError(f"{where}: field 'knots': must be 'spheres' or 'general', got {self.knots!r}")
        if (self.knots == "spheres" or not self.knots_file) and len(self.radii) != self.N:
            raise ConfigError(f"{where}: field 'radii': {len(self.radii)} radii given but N = {self.N}")
        if self.function not in FUNCTIONS:
            raise ConfigError(f"{where}: field 'function': must be one of {', '.join(FUNCTIONS)}")
        if self.function == "samples" and not self.samples_file:
            raise ConfigError(f"{where}: field 'samples_file': required for function = samples")
        if self.function == "exp-linear" and (self.direction is None or len(self.direction) != self.n):
            raise ConfigError(f"{where}: field 'direction': needs {self.n} numbers for exp-linear")
        if self.center is not None and len(self.center) != self.n:
            raise ConfigError(f"{where}: field 'center': needs {self.n} numbers")
        if self.function == "finite-mode" and not self.modes:
            raise ConfigError(f"{where}: field 'modes': required for finite-mode")
        if any(r < 0 or r > self.R for r in self.radii):
            raise ConfigError(f"{where}: field 'radii': every radius must lie in [0, R]")
        if self.n_cheb < 2:
            raise ConfigError(f"{where}: field 'n_cheb': must be >= 2")
        if self.probes < 2:
            raise ConfigError(f"{where}: field 'probes': must be >= 2")
        return self

    def knot_set(self) -> KnotSet:
        if self.knots == "spheres":
            return KnotSet.spheres(self.radii)
        if self.knots_file:
            per_mode, default = read_knots_file(self.knots_file)
            return KnotSet.general(per_mode, default=default)
        return KnotSet.general({}, default=self.radii)


def _floats(text: str, key: str, where: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{where}: field '{key}': expected comma-separated numbers, got {text!r}") from None


def _modes(text: str, where: str) -> Dict[Tuple[int, int], List[float]]:
    out = {}
    for chunk in text.split(";"):
        parts = chunk.split()
        if not parts:
            continue
        if len(parts) < 3:
            raise ConfigError(f"{where}: field 'modes': entry {chunk.strip()!r} needs 'k ell c0 ...'")
        try:
            out[(int(parts[0]), int(parts[1]))] = [float(v) for v in parts[2:]]
        except ValueError:
            raise ConfigError(f"{where}: field 'modes': bad entry {chunk.strip()!r}") from None
    return out


def _bool(text: str, key: str, where: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{where}: field '{key}': expected a boolean, got {text!r}")


_INT = {"n", "N", "k_max", "exactness", "n_cheb", "k_tail", "probes", "random_probes", "seed"}
_FLOAT = {"R", "value", "scale", "C", "growth_threshold"}
_LIST = {"radii", "center", "direction"}
_STR = {"knots", "knots_file", "function", "samples_file"}


def apply_setting(cfg: RunConfig, key: str, raw: str, where: str) -> None:
    raw = raw.strip()
    if key in _INT:
        try:
            setattr(cfg, key, int(raw))
        except ValueError:
            raise ConfigError(f"{where}: field '{key}': expected an integer, got {raw!r}") from None
    elif key in _FLOAT:
        try:
            setattr(cfg, key, float(raw))
        except ValueError:
            raise ConfigError(f"{where}: field '{key}': expected a number, got {raw!r}") from None
    elif key in _LIST:
        setattr(cfg, key, _floats(raw, key, where))
    elif key in _STR:
        setattr(cfg, key, raw)
    elif key == "modes":
        cfg.modes = _modes(raw, where)
    elif key == "all_ell":
        cfg.all_ell = _bool(raw, key, where)
    else:
        raise ConfigError(f"{where}: unknown field '{key}'")


def parse_config(text: str, source: str = "<config>", overrides=()) -> RunConfig:
    cfg = RunConfig(source=source)
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {body!r}")
        key, raw = body.split("=", 1)
        apply_setting(cfg, key.strip(), raw, f"{source}:{lineno}")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected key=value")
        key, raw = item.split("=", 1)
        apply_setting(cfg, key.strip(), raw, f"--set {key.strip()}")
    return cfg.validate()


def load_config(path, overrides=()) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    cfg = parse_config(text, source=str(path), overrides=overrides)
    base = path.parent
    for key in ("knots_file", "samples_file"):
        v = getattr(cfg, key)
        if v and not Path(v).is_absolute():
            setattr(cfg, key, str(base / v))
    return cfg


def read_knots_file(path):
    per_mode = {}
    default = None
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read knots file {path}: {exc.strerror}") from None
    for lineno, line in enumerate(lines, start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = [p.strip() for p in body.split(",")]
        if len(parts) < 3:
            raise ConfigError(f"{path}:{lineno}: expected 'k, ell, r_0, ...'")
        try:
            radii = [float(v) for v in parts[2:]]
            if parts[0] == "*":
                default = radii
            else:
                per_mode[(int(parts[0]), int(parts[1]))] = radii
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: bad number in {body!r}") from None
    return per_mode, default
