"""Width/angle relations of the scissor linkage and output-angle trajectories.

The arm angle alpha is measured between the driving arm and the holding pad.
Pad-to-pad width is ``w = 4 r_drv sin(alpha) + 2 w_hldr``, so squeezing the
pads lowers alpha from ``alpha_init`` (open) to ``alpha_min`` (closed). With an
ideal double ratchet both half-strokes advance the output shaft.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass

import numpy as np

from .params import DomainError, ToolParams

_TOL = 1e-12


class Phase(str, enum.Enum):
    SQUEEZING = "Squeezing"
    STRETCHING = "Stretching"
    FREE = "Free"


def width_to_alpha(w_tool, params: ToolParams):
    """Arm angle in degrees for a pad-to-pad width (scalar or array)."""
    w = np.asarray(w_tool, dtype=float)
    s = (w - 2 * params.w_hldr) / (4 * params.r_drv)
    if np.any(s < -_TOL) or np.any(s > 1 + _TOL):
        raise DomainError(
            f"width outside [{2 * params.w_hldr}, {4 * params.r_drv + 2 * params.w_hldr}] mm")
    a = np.degrees(np.arcsin(np.clip(s, 0.0, 1.0)))
    return float(a) if a.ndim == 0 else a


def alpha_to_width(alpha, params: ToolParams):
    a = np.asarray(alpha, dtype=float)
    if np.any(a < -_TOL) or np.any(a > 90 + _TOL):
        raise DomainError("alpha must lie in [0, 90] deg")
    w = 4 * params.r_drv * np.sin(np.radians(a)) + 2 * params.w_hldr
    return float(w) if w.ndim == 0 else w


def alpha_bounds(params: ToolParams) -> tuple[float, float]:
    """(alpha_min, alpha_init): closed and open arm angles from the width limits."""
    return width_to_alpha(params.w_tool_min, params), width_to_alpha(params.w_tool_max, params)


def stroke(params: ToolParams) -> float:
    return params.w_tool_max - params.w_tool_min


@dataclass(frozen=True)
class ToolState:
    alpha: float
    w_tool: float
    phase: Phase = Phase.FREE

    @classmethod
    def from_alpha(cls, alpha, params: ToolParams, phase=Phase.FREE):
        lo, hi = alpha_bounds(params)
        if not lo - 1e-9 <= alpha <= hi + 1e-9:
            raise DomainError(f"alpha={alpha} outside [{lo:.4f}, {hi:.4f}]")
        return cls(float(alpha), alpha_to_width(alpha, params), Phase(phase))

    @classmethod
    def from_width(cls, w_tool, params: ToolParams, phase=Phase.FREE):
        if not params.w_tool_min - 1e-9 <= w_tool <= params.w_tool_max + 1e-9:
            raise DomainError(f"width {w_tool} outside tool range")
        return cls(width_to_alpha(w_tool, params), float(w_tool), Phase(phase))


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

def _travel(w_max, w_min, offset, r):
    hi = (w_max - offset) / (4 * r)
    lo = (w_min - offset) / (4 * r)
    if not (-1 <= lo <= 1 and -1 <= hi <= 1):
        raise DomainError(f"asin argument outside [-1, 1] ({lo:.6g}, {hi:.6g})")
    return math.degrees(math.asin(hi) - math.asin(lo))


def max_rotational_travel(params: ToolParams) -> float:
    """Maximum arm rotation with the wheel-radius width offset (2 r_whl)."""
    return _travel(params.w_tool_max, params.w_tool_min, 2 * params.r_whl, params.r_drv)


def rotational_travel_conventions(params: ToolParams) -> dict:
    """Travel under both width offsets in use: 2*r_whl and 2*w_hldr.

    The two disagree for the prototype values; everything else in the package
    uses the holder offset. This is reported side by side so the gap is visible.
    """
    lo, hi = alpha_bounds(params)
    out = {"holder_offset_deg": hi - lo, "alpha_min_deg": lo, "alpha_init_deg": hi}
    try:
        out["wheel_offset_deg"] = max_rotational_travel(params)
        out["wheel_offset_alpha_max_deg"] = math.degrees(
            math.asin((params.w_tool_max - 2 * params.r_whl) / (4 * params.r_drv)))
    except DomainError as exc:
        out["wheel_offset_deg"] = None
        out["wheel_offset_error"] = str(exc)
    return out


def min_pad_height(params: ToolParams, convention: str = "closed") -> float:
    """Smallest pad height that keeps both supporting wheels on the pad.

    ``closed`` evaluates at alpha_min, where the wheels are furthest apart.
    ``printed`` evaluates at the open angle alpha_init instead.
    """
    lo, hi = alpha_bounds(params)
    if convention == "closed":
        a = lo
    elif convention == "printed":
        a = hi
    else:
        raise ValueError(f"unknown convention {convention!r}")
    return 2 * (params.r_drv + params.r_sprt) * math.cos(math.radians(a))


# ---------------------------------------------------------------------------
# output angle vs time
# ---------------------------------------------------------------------------

def output_angle_squeeze(t, v_sqz: float, params: ToolParams, return_saturation=False):
    """Output rotation while the gripper closes at finger speed ``v_sqz``.

    Past the full stroke the angle is clamped at ``alpha_init - alpha_min``;
    with ``return_saturation`` a boolean mask of clamped samples is returned too.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be non-negative")
    if v_sqz <= 0:
        raise ValueError("v_sqz must be positive")
    a_min, a_init = alpha_bounds(params)
    s = math.sin(math.radians(a_init)) - v_sqz * t / (4 * params.r_drv)
    s_min = math.sin(math.radians(a_min))
    sat = s <= s_min
    delta = a_init - np.degrees(np.arcsin(np.maximum(s, s_min)))
    if delta.ndim == 0:
        delta, sat = float(delta), bool(sat)
    return (delta, sat) if return_saturation else delta


def squeeze_rate(t, v_sqz, params: ToolParams):
    """d(delta_sqz)/dt in deg/s before saturation."""
    _, a_init = alpha_bounds(params)
    s = math.sin(math.radians(a_init)) - v_sqz * np.asarray(t, float) / (4 * params.r_drv)
    return np.degrees(v_sqz / (4 * params.r_drv) / np.sqrt(1 - s * s))


def cycle_period(v_sqz, v_stch, params: ToolParams) -> tuple[float, float]:
    """(t_m, T): squeeze-to-stretch switch time and full cycle period."""
    if v_sqz <= 0 or v_stch <= 0:
        raise ValueError("finger speeds must be positive")
    t_m = stroke(params) / v_sqz
    return t_m, t_m + stroke(params) / v_stch


def squeeze_branch(tau, v_sqz, params: ToolParams):
    _, a_init = alpha_bounds(params)
    s = math.sin(math.radians(a_init)) - v_sqz * np.asarray(tau, float) / (4 * params.r_drv)
    return a_init - np.degrees(np.arcsin(np.clip(s, -1, 1)))


def stretch_branch(tau, v_sqz, v_stch, params: ToolParams):
    """Stretch half-cycle re-based at the squeeze extreme (alpha back from alpha_min)."""
    a_min, a_init = alpha_bounds(params)
    t_m = stroke(params) / v_sqz
    s = math.sin(math.radians(a_min)) + v_stch * (np.asarray(tau, float) - t_m) / (4 * params.r_drv)
    return a_init - 2 * a_min + np.degrees(np.arcsin(np.clip(s, -1, 1)))


def output_angle_cycle(t, v_sqz, v_stch, params: ToolParams):
    """Cumulative output angle and phase for repeated squeeze/stretch cycles.

    Returns ``(delta_deg, phase)``; arrays in, arrays out.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be non-negative")
    a_min, a_init = alpha_bounds(params)
    per_cycle = 2 * (a_init - a_min)
    t_m, T = cycle_period(v_sqz, v_stch, params)
    k = np.floor(t / T)
    tau = t - k * T
    sq = tau <= t_m
    delta = k * per_cycle + np.where(
        sq, squeeze_branch(np.minimum(tau, t_m), v_sqz, params),
        stretch_branch(np.maximum(tau, t_m), v_sqz, v_stch, params))
    phase = np.where(sq, Phase.SQUEEZING.value, Phase.STRETCHING.value)
    if delta.ndim == 0:
        return float(delta), Phase(str(phase))
    return delta, phase


def time_to_angle(delta, v_sqz, v_stch, params: ToolParams) -> float:
    """Earliest time at which the cumulative output reaches ``delta`` degrees."""
    if delta < 0:
        raise ValueError("delta must be non-negative")
    a_min, a_init = alpha_bounds(params)
    half = a_init - a_min
    t_m, T = cycle_period(v_sqz, v_stch, params)
    k, rem = divmod(delta, 2 * half)
    r4 = 4 * params.r_drv
    if rem <= half:
        tau = r4 * (math.sin(math.radians(a_init)) - math.sin(math.radians(a_init - rem))) / v_sqz
    else:
        tau = t_m + r4 * (math.sin(math.radians(a_min + rem - half))
                          - math.sin(math.radians(a_min))) / v_stch
    return k * T + tau


@dataclass
class CycleTrajectory:
    t: np.ndarray
    delta_out: np.ndarray
    phase: np.ndarray
    t_m: float

    @property
    def samples(self):
        return list(zip(self.t.tolist(), self.delta_out.tolist(), self.phase.tolist()))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t_s", "delta_out_deg", "phase"])
        for t, d, p in zip(self.t, self.delta_out, self.phase):
            w.writerow([f"{t:.6f}", f"{d:.9f}", p])
        return buf.getvalue()


def cycle_trajectory(duration, v_sqz, v_stch, params: ToolParams, dt=0.001) -> CycleTrajectory:
    n = int(round(duration / dt))
    t = np.arange(n + 1) * dt
    delta, phase = output_angle_cycle(t, v_sqz, v_stch, params)
    t_m, _ = cycle_period(v_sqz, v_stch, params)
    return CycleTrajectory(t, np.atleast_1d(delta), np.atleast_1d(phase), t_m)
