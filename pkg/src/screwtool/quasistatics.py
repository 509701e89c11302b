"""Quasi-static force and torque transfer through the tool.

Torques are in N*mm. ``T_sprg`` is the spring torque at the hinge, ``P`` the
pressure the pads exert on the fingers, ``T_sqz``/``T_stch`` the output torque
while the gripper closes/opens.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .kinematics import alpha_bounds
from .params import DomainError, GripperParams, ToolParams


class SingularityError(DomainError):
    """cos(alpha) vanishes: the pad can no longer push the driving arm."""


def _cos(alpha):
    c = np.cos(np.radians(np.asarray(alpha, dtype=float)))
    if np.any(np.abs(c) < 1e-12):
        raise SingularityError("alpha = 90 deg: transmission singular")
    return c


def _out(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def spring_torque(alpha, params: ToolParams, strict_sign=False, n_springs=1):
    """Torsion spring torque at arm angle ``alpha``.

    Default sign makes squeezing (alpha below alpha_init) compress the spring.
    ``strict_sign`` flips the stroke term, giving negative torque on squeeze.
    """
    _, a_init = alpha_bounds(params)
    a = np.asarray(alpha, dtype=float)
    defl = (a - a_init) if strict_sign else (a_init - a)
    return _out(n_springs * params.xi * (params.gamma + defl))


def grip_pressure(alpha, params: ToolParams, **kw):
    """Pad pressure from four springs plus the pawl resistance."""
    t = spring_torque(alpha, params, **kw)
    return _out((4 * np.asarray(t) + params.t_rtct) / (4 * params.r_drv * _cos(alpha)))


@dataclass(frozen=True)
class HoldCondition:
    d_com: float
    d_com_limit: float
    holds: bool


def hold_limit(P_grpr, params: ToolParams) -> float:
    """Largest CoM offset a soft-finger pinch can carry; 0 when it cannot hold at all."""
    if P_grpr < 0:
        raise ValueError("P_grpr must be non-negative")
    e = params.e_soft
    rad = 4 * params.mu ** 2 * P_grpr ** 2 * e ** 2 / params.g_tool - e ** 2
    return math.sqrt(rad) if rad >= 0 else 0.0


def hold_condition(d_com, P_grpr, params: ToolParams) -> HoldCondition:
    lim = hold_limit(P_grpr, params)
    return HoldCondition(float(d_com), lim, bool(d_com <= lim))


def d_finger(gripper: GripperParams, mode="printed") -> float:
    """Lever arm from the finger contact to the output axis.

    ``printed`` is ``(w_fgr + l_fgr) sin(beta)``; ``projection`` uses
    ``w_fgr cos(beta) + l_fgr sin(beta)``, which peaks at atan(l/w).
    """
    b = math.radians(gripper.beta)
    if mode == "printed":
        return (gripper.w_fgr + gripper.l_fgr) * math.sin(b)
    if mode == "projection":
        return gripper.w_fgr * math.cos(b) + gripper.l_fgr * math.sin(b)
    raise ValueError(f"unknown d_finger mode {mode!r}")


def _spring_force(alpha, params, four_spring=False, strict_sign=False):
    n = 4 if four_spring else 1
    t = spring_torque(alpha, params, strict_sign=strict_sign, n_springs=n)
    return np.asarray(t) / (params.r_drv * _cos(alpha))


def torque_squeeze(alpha, F_grpr, d_fgr, params: ToolParams, four_spring=False,
                   strict_sign=False):
    """Output torque while squeezing. Negative values mean the gripper stalls."""
    if np.any(np.asarray(F_grpr) < 0):
        raise ValueError("F_grpr must be non-negative")
    f = _spring_force(alpha, params, four_spring, strict_sign)
    return _out((F_grpr - f) * d_fgr)


def torque_stretch(alpha, d_fgr, params: ToolParams, four_spring=False, strict_sign=False):
    return _out(_spring_force(alpha, params, four_spring, strict_sign) * d_fgr)


def stalls(alpha, F_grpr, d_fgr, params: ToolParams, **kw):
    return np.asarray(torque_squeeze(alpha, F_grpr, d_fgr, params, **kw)) < 0


@dataclass
class TorqueCurve:
    alpha: np.ndarray
    t_sqz: np.ndarray
    t_stch: np.ndarray

    @property
    def stalled(self):
        return self.t_sqz < 0

    def max_squeeze(self):
        return float(np.max(self.t_sqz))

    def max_stretch(self):
        return float(np.max(self.t_stch))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha_deg", "T_sqz_Nmm", "T_stch_Nmm"])
        for a, s, t in zip(self.alpha, self.t_sqz, self.t_stch):
            w.writerow([f"{a:.6f}", f"{s:.6f}", f"{t:.6f}"])
        return buf.getvalue()


def torque_curve(alphas, F_grpr, d_fgr, params: ToolParams, **kw) -> TorqueCurve:
    a = np.atleast_1d(np.asarray(alphas, dtype=float))
    if a.size == 0:
        raise ValueError("empty alpha grid")
    return TorqueCurve(a,
                       np.atleast_1d(torque_squeeze(a, F_grpr, d_fgr, params, **kw)),
                       np.atleast_1d(torque_stretch(a, d_fgr, params, **kw)))


# Tightening torque in N*m per size and property class.
PROPERTY_CLASSES = ("4.8", "6.8", "8.8", "10.9", "12.9")
SCREW_TABLE = {
    "M3":   (0.56, 1.10, 1.45, 2.08, 2.43),
    "M3.5": (0.89, 1.73, 2.28, 3.27, 3.82),
    "M4":   (1.31, 2.57, 3.38, 4.84, 5.66),
    "M5":   (2.65, 5.19, 6.80, 9.78, 11.43),
    "M6":   (4.50, 8.81, 11.60, 16.60, 19.40),
}


@dataclass(frozen=True)
class ScrewCell:
    size: str
    property_class: str
    torque_Nm: float

    @property
    def rank(self):
        return list(SCREW_TABLE).index(self.size), PROPERTY_CLASSES.index(self.property_class)


def fastenable_screws(T_sqz_max, T_stch_max, mode="double-ratchet") -> list[ScrewCell]:
    """Screw cells whose tightening torque the tool can deliver.

    A double ratchet is limited by its weaker half-cycle, a single ratchet only
    by the squeeze torque. Cells come back ordered by (size, class).
    """
    if T_sqz_max < 0 or T_stch_max < 0:
        raise ValueError("torques must be non-negative")
    if mode == "double-ratchet":
        gate = min(T_sqz_max, T_stch_max)
    elif mode == "single-ratchet":
        gate = T_sqz_max
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return [ScrewCell(size, cls, v)
            for size, row in SCREW_TABLE.items()
            for cls, v in zip(PROPERTY_CLASSES, row)
            if v * 1000.0 <= gate]


def largest_screw(cells) -> ScrewCell | None:
    """Biggest fastenable size, at the strongest class available for it."""
    return max(cells, key=lambda c: c.rank) if cells else None
