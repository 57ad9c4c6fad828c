"""Experiment configuration: a flat INI-style file with section headers.

Angles may be written as simple arithmetic in ``pi`` (``11*pi/6``).
"""

import ast
import configparser
import math
import operator
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

try:
    from importlib.resources import files as _res_files
except ImportError:  # pragma: no cover
    _res_files = None


class ConfigError(ValueError):
    """Unreadable or invalid configuration; message names the offending field."""


_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.Pow: operator.pow, ast.USub: operator.neg, ast.UAdd: operator.pos}


def parse_number(text: str) -> float:
    """Evaluate a numeric literal or an arithmetic expression in ``pi``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ValueError(f"unsupported expression {text!r}")

    return ev(ast.parse(text.strip(), mode="eval"))


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# (section, key) for every field; order defines the serialized layout
_LAYOUT = {
    "group": ("problem", str),
    "grid_size": ("problem", int),
    "sigma": ("problem", float),
    "truncation": ("problem", int),
    "family": ("endpoints", str),
    "kappa": ("endpoints", float),
    "location0": ("endpoints", float),
    "location1": ("endpoints", float),
    "tol": ("solver", float),
    "max_iter": ("solver", int),
    "directory": ("output", str),
    "n_times": ("output", int),
    "simulate": ("simulate", bool),
    "n_particles": ("simulate", int),
    "n_steps": ("simulate", int),
    "seed": ("simulate", int),
}


@dataclass
class ExperimentConfig:
    group: str = "so2"
    grid_size: int = 512
    sigma: float = 1.0
    truncation: Optional[int] = None
    family: str = "von_mises"
    kappa: float = 40.0
    location0: float = math.pi / 6
    location1: float = 11 * math.pi / 6
    tol: float = 1e-10
    max_iter: int = 500
    directory: str = "liebridge_out"
    n_times: int = 21
    simulate: bool = False
    n_particles: int = 100_000
    n_steps: int = 200
    seed: int = 0

    def validate(self) -> "ExperimentConfig":
        def bad(name, why):
            sec = _LAYOUT[name][0]
            raise ConfigError(f"[{sec}] {name}: {why}")

        if self.group not in ("so2", "so3"):
            bad("group", f"expected so2 or so3, got {self.group!r}")
        if self.grid_size < 8:
            bad("grid_size", "must be at least 8")
        if not self.sigma > 0:
            bad("sigma", "must be positive")
        if self.truncation is not None and self.truncation < 1:
            bad("truncation", "must be positive")
        if self.family != "von_mises":
            bad("family", f"unknown density family {self.family!r}")
        if not self.kappa > 0:
            bad("kappa", "must be positive")
        if self.group == "so3":
            for name in ("location0", "location1"):
                if not 0 < getattr(self, name) <= math.pi:
                    bad(name, "SO(3) rotation angle must lie in (0, pi]")
        if not self.tol > 0:
            bad("tol", "must be positive")
        if self.max_iter < 1:
            bad("max_iter", "must be positive")
        if self.n_times < 2:
            bad("n_times", "need at least 2 time samples")
        if self.simulate and self.n_particles < 1000:
            bad("n_particles", "need at least 1000 particles")
        if self.n_steps < 1:
            bad("n_steps", "must be positive")
        return self

    # -- serialization ----------------------------------------------------

    def to_text(self) -> str:
        sections = {}
        for f in fields(self):
            sec, _ = _LAYOUT[f.name]
            val = getattr(self, f.name)
            if val is None:
                continue
            if isinstance(val, bool):
                text = "true" if val else "false"
            elif isinstance(val, float):
                text = repr(val)
            else:
                text = str(val)
            sections.setdefault(sec, []).append(f"{f.name} = {text}")
        return "\n\n".join(f"[{sec}]\n" + "\n".join(lines) for sec, lines in sections.items()) + "\n"

    @classmethod
    def from_text(cls, text: str, source: str = "<config>") -> "ExperimentConfig":
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            parser.read_string(text, source=source)
        except configparser.Error as exc:
            raise ConfigError(f"{source}: {exc}") from exc
        known = {(sec, key) for key, (sec, _) in _LAYOUT.items()}
        for sec in parser.sections():
            for key in parser[sec]:
                if (sec, key) not in known:
                    raise ConfigError(f"{source}: unknown field [{sec}] {key}")
        values = asdict(cls())
        for name, (sec, typ) in _LAYOUT.items():
            if not parser.has_option(sec, name):
                continue
            raw = parser.get(sec, name).strip()
            try:
                if raw == "" or raw.lower() == "none":
                    values[name] = None if name == "truncation" else cls.__dataclass_fields__[name].default
                elif typ is bool:
                    values[name] = _parse_bool(raw)
                elif typ is int:
                    num = parse_number(raw)
                    if num != int(num):
                        raise ValueError(f"expected an integer, got {raw!r}")
                    values[name] = int(num)
                elif typ is float:
                    values[name] = parse_number(raw)
                else:
                    values[name] = raw
            except (ValueError, SyntaxError, ZeroDivisionError) as exc:
                raise ConfigError(f"{source}: [{sec}] {name}: {exc}") from exc
        return cls(**values).validate()

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_text(text, source=str(path))


def preset_path(name: str) -> Path:
    """Path of a bundled preset such as ``so2_paper.cfg``."""
    if not name.endswith(".cfg"):
        name += ".cfg"
    if _res_files is not None:
        p = Path(str(_res_files("liebridge") / "presets" / name))
    else:  # pragma: no cover
        p = Path(__file__).parent / "presets" / name
    if not p.is_file():
        raise ConfigError(f"no bundled preset named {name!r}")
    return p


def load_config(spec: str) -> ExperimentConfig:
    """Load from a filesystem path, falling back to a bundled preset name."""
    p = Path(spec)
    if p.is_file():
        return ExperimentConfig.from_file(p)
    return ExperimentConfig.from_file(preset_path(p.name))
