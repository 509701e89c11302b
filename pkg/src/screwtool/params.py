"""Tool and gripper constants, validation, and the ``key = value`` config format.

Units throughout the package: lengths in mm, angles in degrees, forces in N,
torques in N*mm, spring rate in N*mm/deg.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Iterable

DEFAULT_CONFIG = Path(__file__).parent / "data" / "prototype.cfg"


class ConfigError(ValueError):
    """Malformed config text. ``line`` is 1-based, or None when not line-specific."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class DomainError(ValueError):
    """Input outside the domain where a closed-form relation is defined."""


class ParamsInvalid(ValueError):
    """Raised by :func:`load_params` when the loaded values violate an invariant."""

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


def sind(a):
    return math.sin(math.radians(a))


def cosd(a):
    return math.cos(math.radians(a))


def asind(x):
    return math.degrees(math.asin(x))


@dataclass(frozen=True)
class ToolParams:
    """Geometric and elastic constants of the screwing tool.

    Defaults are the curved-pad prototype. ``mu``, ``e_soft``, ``g_tool``,
    ``t_rtct`` and ``gamma`` have no published values; see README.
    """

    w_tool_max: float = 83.0   # max pad-to-pad width
    w_tool_min: float = 40.0   # min pad-to-pad width
    w_hldr: float = 6.5        # holding surface to hinge center
    w_pad: float = 2.0         # pad thickness
    r_drv: float = 20.0        # driving arm
    r_sprt: float = 10.0       # supporting arm
    r_whl: float = 1.5         # supporting wheel radius
    l_tool: float = 54.0       # pad height
    xi: float = 6.00           # spring rate, N*mm/deg
    gamma: float = 28.5        # spring preload deformation, deg
    d_rtct: float = 32.0       # ratchet diameter
    t_rtct: float = 0.0        # reversing-pawl resisting torque, N*mm
    mu: float = 0.5            # finger/pad friction
    e_soft: float = 5.0        # soft-finger eccentricity, mm
    g_tool: float = 2.0        # tool weight, N

    def with_(self, **changes) -> "ToolParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class GripperParams:
    f_grpr_max: float = 125.0  # Robotiq Hand-E maximum
    v_sqz: float = 150.0
    v_stch: float = 150.0
    w_fgr: float = 20.0
    l_fgr: float = 35.0
    beta: float = 57.0

    def with_(self, **changes) -> "GripperParams":
        return replace(self, **changes)


TOOL_KEYS = tuple(f.name for f in fields(ToolParams))
GRIPPER_KEYS = tuple(f.name for f in fields(GripperParams))

_LENGTHS = ("w_tool_max", "w_tool_min", "w_hldr", "w_pad", "r_drv", "r_sprt",
            "r_whl", "l_tool", "d_rtct", "e_soft")


@dataclass
class ValidationReport:
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __iter__(self):
        return iter(self.violations)

    def __len__(self):
        return len(self.violations)


def validate(params: ToolParams) -> ValidationReport:
    """Check tool invariants and the layout constraints on widths and ratchet.

    Never raises; an empty report means the parameter set is usable.
    """
    v = []
    for name in _LENGTHS:
        if not getattr(params, name) > 0:
            v.append(f"{name} must be positive")
    if params.xi < 0:
        v.append("xi must be non-negative")
    if params.gamma < 0:
        v.append("gamma must be non-negative")
    if not params.mu > 0:
        v.append("mu must be positive")
    if params.g_tool <= 0:
        v.append("g_tool must be positive")
    if params.t_rtct < 0:
        v.append("t_rtct must be non-negative")
    if params.w_tool_min >= params.w_tool_max:
        v.append("min exceeds max: w_tool_min must be < w_tool_max")
    if params.w_tool_min < params.d_rtct:
        v.append("pads collide with ratchet: w_tool_min < d_rtct")
    if params.r_drv > 0:
        s = (params.w_tool_max - 2 * params.w_hldr) / (4 * params.r_drv)
        if not 0 < s < 1:
            v.append("alpha at w_tool_max must lie strictly between 0 and 90 deg")
        s_min = (params.w_tool_min - 2 * params.w_hldr) / (4 * params.r_drv)
        if not 0 < s_min:
            v.append("alpha at w_tool_min must be positive (w_tool_min > 2*w_hldr)")
    return ValidationReport(v)


def validate_gripper(gripper: GripperParams) -> ValidationReport:
    v = []
    if not gripper.f_grpr_max > 0:
        v.append("f_grpr_max must be positive")
    if not (gripper.v_sqz > 0 and gripper.v_stch > 0):
        v.append("finger speeds must be positive")
    if not (gripper.w_fgr > 0 and gripper.l_fgr > 0):
        v.append("finger pad dimensions must be positive")
    if not 0 < gripper.beta <= 90:
        v.append("beta must be in (0, 90] deg")
    return ValidationReport(v)


# ---------------------------------------------------------------------------
# key = value config grammar
# ---------------------------------------------------------------------------

@dataclass
class ConfigSection:
    name: str | None          # None for the top-level block, else "[name]"
    values: dict[str, str]
    lines: dict[str, int]     # key -> source line


def parse_config(text: str) -> list[ConfigSection]:
    """Split config text into sections of raw string values.

    ``#`` starts a comment, blank lines are ignored, ``[name]`` opens a new
    section (sections may repeat). Duplicate keys within one section are an
    error.
    """
    sections = [ConfigSection(None, {}, {})]
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise ConfigError(f"bad section header {raw.strip()!r}", lineno)
            sections.append(ConfigSection(line[1:-1].strip(), {}, {}))
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"empty key or value in {raw.strip()!r}", lineno)
        cur = sections[-1]
        if key in cur.values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        cur.values[key] = value
        cur.lines[key] = lineno
    return sections


def parse_float(section: ConfigSection, key: str) -> float:
    raw = section.values[key]
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{key}: not a number: {raw!r}", section.lines[key]) from None
    if not math.isfinite(value):
        raise ConfigError(f"{key}: must be finite", section.lines[key])
    return value


def params_from_mapping(values: dict[str, float]) -> tuple[ToolParams, GripperParams]:
    tool = ToolParams(**{k: v for k, v in values.items() if k in TOOL_KEYS})
    gripper = GripperParams(**{k: v for k, v in values.items() if k in GRIPPER_KEYS})
    return tool, gripper


def loads_params(text: str, *, check: bool = True) -> tuple[ToolParams, GripperParams]:
    sections = parse_config(text)
    top = sections[0]
    values = {}
    for key in top.values:
        if key not in TOOL_KEYS and key not in GRIPPER_KEYS:
            warnings.warn(f"line {top.lines[key]}: unknown key {key!r} ignored", stacklevel=2)
            continue
        values[key] = parse_float(top, key)
    tool, gripper = params_from_mapping(values)
    if check:
        problems = validate(tool).violations + validate_gripper(gripper).violations
        if problems:
            raise ParamsInvalid(problems)
    return tool, gripper


def load_params(path=None, *, check: bool = True) -> tuple[ToolParams, GripperParams]:
    """Read a parameter file; keys not present keep their defaults.

    With ``path=None`` the packaged ``prototype.cfg`` is read.
    """
    path = DEFAULT_CONFIG if path is None else Path(path)
    return loads_params(path.read_text(), check=check)


def dumps_params(tool: ToolParams, gripper: GripperParams | None = None) -> str:
    out = ["# tool parameters (mm, deg, N, N*mm)"]
    out += [f"{k} = {v!r}" for k, v in asdict(tool).items()]
    if gripper is not None:
        out.append("# gripper")
        out += [f"{k} = {v!r}" for k, v in asdict(gripper).items()]
    return "\n".join(out) + "\n"


def save_params(path, tool: ToolParams, gripper: GripperParams | None = None) -> None:
    Path(path).write_text(dumps_params(tool, gripper))


def iter_sections(sections: Iterable[ConfigSection], name: str):
    return (s for s in sections if s.name == name)
