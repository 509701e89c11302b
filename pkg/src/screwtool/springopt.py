"""Spring-rate selection balancing squeeze and stretch output torque.

The objective is the integral over the arm stroke of |T_sqz * T_stch|. Below
the stall rate it is a concave quadratic in xi, so a coarse grid followed by
golden-section refinement finds the maximum reliably.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kinematics import alpha_bounds
from .params import ConfigError, ToolParams, iter_sections, parse_config, parse_float
from .quasistatics import torque_squeeze, torque_stretch

QUAD_STEP = 0.1      # deg
GRID_STEP = 0.5      # N*mm/deg
XI_TOL = 0.01        # N*mm/deg
_INVPHI = (math.sqrt(5) - 1) / 2


def stroke_grid(params: ToolParams, alpha_end=None, step=QUAD_STEP):
    a_min, a_init = alpha_bounds(params)
    lo = a_min if alpha_end is None else alpha_end
    if not lo < a_init:
        raise ValueError(f"alpha_end={lo} must be below alpha_init={a_init}")
    n = max(2, int(math.ceil((a_init - lo) / step)) + 1)
    return np.linspace(lo, a_init, n)


def objective(xi, F_grpr, d_fgr, params: ToolParams, alpha_end=None, step=QUAD_STEP, **kw):
    """Trapezoid integral of |T_sqz T_stch| d(alpha), in N^2 mm^2 deg."""
    if xi < 0:
        raise ValueError("xi must be non-negative")
    p = params.with_(xi=float(xi))
    a = stroke_grid(params, alpha_end, step)
    f = np.abs(torque_squeeze(a, F_grpr, d_fgr, p, **kw) * torque_stretch(a, d_fgr, p, **kw))
    return float(np.trapezoid(f, a))


def stall_rate(F_grpr, params: ToolParams, alpha_end=None, four_spring=False) -> float:
    """Smallest xi at which the squeeze torque reaches zero somewhere on the stroke."""
    a = stroke_grid(params, alpha_end)
    _, a_init = alpha_bounds(params)
    defl = (4 if four_spring else 1) * (params.gamma + a_init - a)
    with np.errstate(divide="ignore"):
        lim = F_grpr * params.r_drv * np.cos(np.radians(a)) / defl
    lim = lim[defl > 0]
    return float(lim.min()) if lim.size else math.inf


def golden_max(f, a, b, tol=XI_TOL):
    """Golden-section search for the maximum of a unimodal ``f`` on [a, b]."""
    c, d = b - _INVPHI * (b - a), a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


@dataclass
class SpringOptimum:
    xi: float
    objective: float
    bracket: tuple[float, float]
    search_range: tuple[float, float]
    degenerate: bool = False
    at_boundary: bool = False
    non_physical: bool = False
    notes: list[str] = field(default_factory=list)

    def to_dict(self):
        return {
            "xi_star": self.xi, "objective": self.objective,
            "bracket": list(self.bracket), "search_range": list(self.search_range),
            "degenerate": self.degenerate, "at_boundary": self.at_boundary,
            "non_physical": self.non_physical, "notes": list(self.notes),
        }


def optimize_xi(F_grpr, d_fgr, params: ToolParams, search_range=None, tol=XI_TOL,
                grid_step=GRID_STEP, alpha_end=None, **kw) -> SpringOptimum:
    """Spring rate maximizing :func:`objective`.

    Without ``search_range`` the search covers (0, stall rate], where the
    integrand is smooth; beyond it |T_sqz| grows without bound.
    """
    if search_range is None:
        hi = stall_rate(F_grpr, params, alpha_end, kw.get("four_spring", False))
        if not 0 < hi < math.inf:
            raise ValueError("no stall-free spring rate exists; pass search_range")
        search_range = (0.0, hi)
    lo, hi = map(float, search_range)
    if not 0 <= lo < hi:
        raise ValueError("search_range must be a positive interval")

    def f(x):
        return objective(x, F_grpr, d_fgr, params, alpha_end, **kw)

    grid = np.arange(lo, hi, grid_step)
    grid = np.append(grid, hi)
    vals = np.array([f(x) for x in grid])
    i = int(np.argmax(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = SpringOptimum(0.0, 0.0, (float(a), float(b)), (lo, hi))
    if np.ptp(vals) <= 1e-12 * max(1.0, np.abs(vals).max()):
        res.degenerate = True
        res.notes.append("objective is flat over the search range")
        res.xi, res.objective = float(grid[i]), float(vals[i])
        return res
    x = golden_max(f, a, b, tol)
    # the golden search never evaluates the interval ends, check them directly
    for cand in (a, b):
        if f(cand) > f(x):
            x = cand
    res.xi, res.objective = float(x), f(x)
    res.at_boundary = bool(abs(x - lo) <= tol or abs(x - hi) <= tol)
    a_grid = stroke_grid(params, alpha_end)
    t_sqz = torque_squeeze(a_grid, F_grpr, d_fgr, params.with_(xi=res.xi), **kw)
    if F_grpr == 0 or np.any(t_sqz < 0):
        res.non_physical = True
        res.notes.append("squeeze torque is negative on part of the stroke at xi*")
    return res


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpringCatalogEntry:
    xi: float
    max_outer_diameter: float
    label: str = ""

    def __post_init__(self):
        if not self.xi > 0:
            raise ValueError("catalog xi must be positive")


# illustrative only, not a real vendor list
DEFAULT_CATALOG = (
    SpringCatalogEntry(2.00, 8.0, "TS-0200"),
    SpringCatalogEntry(4.00, 10.0, "TS-0400"),
    SpringCatalogEntry(6.00, 12.0, "TS-0600"),
    SpringCatalogEntry(10.0, 16.0, "TS-1000"),
    SpringCatalogEntry(15.0, 20.0, "TS-1500"),
    SpringCatalogEntry(19.5, 24.0, "TS-1950"),
    SpringCatalogEntry(25.0, 28.0, "TS-2500"),
)


class NoSpringFits(ValueError):
    pass


def select_from_catalog(xi_star, catalog, max_diameter) -> SpringCatalogEntry:
    """Entry nearest ``xi_star`` that fits ``max_diameter``; ties go to the weaker spring."""
    catalog = list(catalog)
    if not catalog:
        raise ValueError("empty catalog")
    fits = [e for e in catalog if e.max_outer_diameter <= max_diameter]
    if not fits:
        raise NoSpringFits(f"no spring fits within {max_diameter} mm")
    return min(fits, key=lambda e: (abs(e.xi - xi_star), e.xi))


def parse_catalog(text: str) -> list[SpringCatalogEntry]:
    out = []
    for sec in iter_sections(parse_config(text), "spring"):
        for key in ("xi", "max_outer_diameter"):
            if key not in sec.values:
                first = min(sec.lines.values(), default=None)
                raise ConfigError(f"[spring] block missing {key!r}", first)
        try:
            out.append(SpringCatalogEntry(parse_float(sec, "xi"),
                                          parse_float(sec, "max_outer_diameter"),
                                          sec.values.get("label", "")))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc), sec.lines["xi"]) from None
    if not out:
        raise ConfigError("catalog has no [spring] blocks")
    return out
