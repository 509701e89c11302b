"""Curved inner profile of the holding pads.

In the pad frame at the hinge (x toward the ratchet centre, y along the pad)
the supporting-wheel centre traces the quarter ellipse
``((r_drv - r_sprt) sin a, (r_drv + r_sprt) cos a)``. The pad surface is that
curve offset by ``r_whl`` along the inward normal.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .kinematics import alpha_bounds
from .params import DomainError, ToolParams


def _axes(params: ToolParams):
    if params.r_sprt >= params.r_drv:
        raise DomainError("degenerate geometry: r_sprt must be shorter than r_drv")
    return params.r_drv - params.r_sprt, params.r_drv + params.r_sprt


def _scalar(*xs):
    return tuple(float(x) if np.ndim(x) == 0 else x for x in xs)


def wheel_center(alpha, params: ToolParams):
    a_ax, b_ax = _axes(params)
    a = np.radians(np.asarray(alpha, dtype=float))
    return _scalar(a_ax * np.sin(a), b_ax * np.cos(a))


def outward_normal_angle(alpha, params: ToolParams):
    """Angle (rad) of the outward normal to the wheel-centre curve.

    Equals atan(-1/f') for the curve slope f' = dy/dx; atan2 keeps it defined
    at both ends of [0, 90] deg.
    """
    a_ax, b_ax = _axes(params)
    a = np.radians(np.asarray(alpha, dtype=float))
    return np.arctan2(a_ax * np.cos(a), b_ax * np.sin(a))


def offset_angle(alpha, params: ToolParams):
    """theta with ``profile = (x + r_whl cos theta, y - r_whl sin theta)``.

    Of the two normals, this picks the one that moves the profile toward
    smaller y, into the pad.
    """
    return np.pi - outward_normal_angle(alpha, params)


def profile_point(alpha, params: ToolParams):
    x, y = wheel_center(alpha, params)
    th = offset_angle(alpha, params)
    return _scalar(x + params.r_whl * np.cos(th), y - params.r_whl * np.sin(th))


@dataclass
class CamProfile:
    alpha: np.ndarray
    x_whl: np.ndarray
    y_whl: np.ndarray
    x_sprt: np.ndarray
    y_sprt: np.ndarray

    @property
    def points(self):
        return np.column_stack([self.x_sprt, self.y_sprt])

    def offset_error(self, r_whl):
        """Largest deviation of |profile - wheel centre| from r_whl."""
        d = np.hypot(self.x_sprt - self.x_whl, self.y_sprt - self.y_whl)
        return float(np.max(np.abs(d - r_whl)))

    def bounding_box(self):
        return (float(self.x_sprt.min()), float(self.x_sprt.max()),
                float(self.y_sprt.min()), float(self.y_sprt.max()))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha_deg", "x_whl_mm", "y_whl_mm", "x_sprt_mm", "y_sprt_mm"])
        for row in zip(self.alpha, self.x_whl, self.y_whl, self.x_sprt, self.y_sprt):
            w.writerow([f"{v:.9f}" for v in row])
        return buf.getvalue()

    def to_polyline(self) -> str:
        return "".join(f"{x:.9f} {y:.9f}\n" for x, y in zip(self.x_sprt, self.y_sprt))


def synthesize(params: ToolParams, n_samples=100, alpha_range=None) -> CamProfile:
    """Profile sampled uniformly in alpha over the working stroke."""
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    _axes(params)
    lo, hi = alpha_bounds(params) if alpha_range is None else alpha_range
    a = np.linspace(lo, hi, int(n_samples))
    xw, yw = wheel_center(a, params)
    xs, ys = profile_point(a, params)
    return CamProfile(a, xw, yw, xs, ys)


def fd_inward_normal_angle(alpha, params: ToolParams, h=1e-5):
    """theta from central differences of the wheel-centre curve (reference check)."""
    x1, y1 = wheel_center(np.asarray(alpha) - h, params)
    x2, y2 = wheel_center(np.asarray(alpha) + h, params)
    tx, ty = x2 - x1, y2 - y1
    # rotate the tangent (direction of increasing alpha) clockwise: inward normal
    nx, ny = ty, -tx
    return np.arctan2(-ny, nx)
