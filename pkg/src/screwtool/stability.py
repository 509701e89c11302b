"""Planar grasp wrench set of the held tool and its quality index Q.

Wrenches are ``(f_x, f_y, tau / L)`` with ``L`` a characteristic length (half
the pad height by default), so Q has units of force. Each contact contributes
the convex hull of the origin and its generator wrenches at the force limit;
the grasp wrench set is the Minkowski sum over contacts and Q is the distance
from the origin to the nearest facet (0 when the origin is not interior).

Contact layout in the pad frame at the hinge (x toward the ratchet):

* c1, c2: gripper finger on the outer pad face at ``(-w_hldr, +-l_fgr/2)``,
  normal +x, soft finger with the ellipse ``(f_t/mu)^2 + (tau_n/(mu e))^2 <= P^2``.
* c3, c4: supporting wheels on the curved profile at ``(x_sprt, +-y_sprt)``,
  frictionless, pushing along the inward profile normal.
* c5, c6: hinge pin, frictionless and compression-only along the two half
  linkage arms, directions ``(-sin a, -+cos a)``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial import ConvexHull

from .cam import outward_normal_angle, profile_point
from .params import DomainError, GripperParams, ToolParams

EPS = 1e-9


@dataclass(frozen=True)
class SoftFinger:
    mu: float
    e_soft: float


@dataclass(frozen=True)
class Frictionless:
    pass


@dataclass(frozen=True)
class WrenchContact:
    p: tuple[float, float]
    n: tuple[float, float]
    friction: SoftFinger | Frictionless = Frictionless()
    force_limit: float = 1.0
    name: str = ""

    def __post_init__(self):
        nn = np.hypot(*self.n)
        if nn < 1e-12:
            raise ValueError("contact normal is zero")
        if not self.force_limit > 0:
            raise ValueError("force_limit must be positive")
        object.__setattr__(self, "n", (self.n[0] / nn, self.n[1] / nn))
        object.__setattr__(self, "p", (float(self.p[0]), float(self.p[1])))


def _cross(p, f):
    return p[0] * f[..., 1] - p[1] * f[..., 0]


def contact_wrench_generators(c: WrenchContact, n_edges=8) -> np.ndarray:
    """Generator wrenches ``(f_x, f_y, tau)`` at the contact's force limit.

    A soft finger samples its friction/moment ellipse at ``n_edges`` angles
    ``2 pi k / n_edges``; a frictionless contact has the single normal force.
    """
    n = np.asarray(c.n)
    P = c.force_limit
    if isinstance(c.friction, SoftFinger):
        if n_edges < 2:
            raise ValueError("n_edges must be at least 2 for a frictional contact")
        t = np.array([-n[1], n[0]])
        phi = 2 * np.pi * np.arange(n_edges) / n_edges
        mu, e = c.friction.mu, c.friction.e_soft
        f = P * n + np.outer(mu * P * np.cos(phi), t)
        tau_n = mu * P * e * np.sin(phi)
    else:
        f = (P * n)[None, :]
        tau_n = np.zeros(1)
    return np.column_stack([f, _cross(c.p, f) + tau_n])


def _rank(pts):
    if len(pts) < 2:
        return 0
    return int(np.linalg.matrix_rank(pts - pts[0], tol=1e-9 * max(1.0, np.abs(pts).max())))


@dataclass
class WrenchSet:
    wrenches: np.ndarray              # vertices (or all points when rank-deficient)
    hull: ConvexHull | None
    length_scale: float

    @property
    def rank(self):
        return _rank(self.wrenches)


def minkowski_sum(sets) -> np.ndarray:
    acc = np.zeros((1, 3))
    for s in sets:
        acc = (acc[:, None, :] + np.asarray(s)[None, :, :]).reshape(-1, 3)
        acc = np.unique(np.round(acc, 12), axis=0)
        if _rank(acc) == 3:
            acc = acc[ConvexHull(acc).vertices]
    return acc


def grasp_wrench_set(contacts, n_edges=8, length_scale=27.0) -> WrenchSet:
    contacts = list(contacts)
    if len(contacts) < 2:
        raise ValueError("need at least two contacts")
    sets = []
    for c in contacts:
        g = contact_wrench_generators(c, n_edges)
        g[:, 2] /= length_scale
        sets.append(np.vstack([np.zeros(3), g]))
    pts = minkowski_sum(sets)
    hull = ConvexHull(pts) if _rank(pts) == 3 else None
    return WrenchSet(pts, hull, float(length_scale))


def hull_distance(points) -> float:
    """Origin-to-boundary distance of conv(points); 0 if the origin is not interior."""
    pts = np.asarray(points, dtype=float)
    if _rank(pts) < pts.shape[1]:
        return 0.0
    h = ConvexHull(pts)
    d = (-h.equations[:, -1]).min()
    return float(d) if d > EPS else 0.0


def stability_index(ws: WrenchSet) -> float:
    if ws.hull is None:
        return 0.0
    d = (-ws.hull.equations[:, -1]).min()
    return float(d) if d > EPS else 0.0


def discretization_bound(contacts, n_edges, length_scale=27.0) -> float:
    """Upper bound on |Q_exact - Q(n_edges)| from polygonising the soft-finger ellipses."""
    tot = 0.0
    for c in contacts:
        if isinstance(c.friction, SoftFinger):
            semi = c.friction.mu * c.force_limit * max(1.0, c.friction.e_soft / length_scale)
            tot += (1 - np.cos(np.pi / n_edges)) * semi
    return tot


# ---------------------------------------------------------------------------
# tool layout
# ---------------------------------------------------------------------------

def tool_contacts(alpha, params: ToolParams, gripper: GripperParams | None = None,
                  finger_limit=1.0, wheel_limit=1.0, hinge_limit=1.0) -> list[WrenchContact]:
    if not 0 < alpha < 90:
        raise DomainError("alpha must lie in (0, 90) deg")
    gripper = gripper or GripperParams()
    soft = SoftFinger(params.mu, params.e_soft)
    hy = gripper.l_fgr / 2
    xs, ys = profile_point(alpha, params)
    th0 = float(outward_normal_angle(alpha, params))
    a = np.radians(alpha)
    return [
        WrenchContact((-params.w_hldr, hy), (1.0, 0.0), soft, finger_limit, "c1"),
        WrenchContact((-params.w_hldr, -hy), (1.0, 0.0), soft, finger_limit, "c2"),
        WrenchContact((xs, ys), (-np.cos(th0), -np.sin(th0)), Frictionless(), wheel_limit, "c3"),
        WrenchContact((xs, -ys), (-np.cos(th0), np.sin(th0)), Frictionless(), wheel_limit, "c4"),
        WrenchContact((0.0, 0.0), (-np.sin(a), -np.cos(a)), Frictionless(), hinge_limit, "c5"),
        WrenchContact((0.0, 0.0), (-np.sin(a), np.cos(a)), Frictionless(), hinge_limit, "c6"),
    ]


def layout_json(contacts) -> str:
    def enc(c):
        d = asdict(c)
        d["friction"] = type(c.friction).__name__
        d.update(asdict(c.friction))
        return d
    return json.dumps([enc(c) for c in contacts], indent=2)


def tool_stability(alpha, params: ToolParams, gripper=None, n_edges=8, length_scale=None,
                   **limits) -> float:
    L = params.l_tool / 2 if length_scale is None else length_scale
    cs = tool_contacts(alpha, params, gripper, **limits)
    return stability_index(grasp_wrench_set(cs, n_edges, L))


@dataclass
class StabilityGrid:
    alpha: np.ndarray
    r_sprt: np.ndarray
    Q: np.ndarray                      # shape (len(r_sprt), len(alpha)), NaN when infeasible
    infeasible: np.ndarray = field(default=None)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha_deg", "r_sprt_mm", "Q"])
        for i, rs in enumerate(self.r_sprt):
            for j, a in enumerate(self.alpha):
                q = "infeasible" if self.infeasible[i, j] else f"{self.Q[i, j]:.9f}"
                w.writerow([f"{a:.6f}", f"{rs:.6f}", q])
        return buf.getvalue()


def sweep_stability(params: ToolParams, r_sprt_values, alpha_values, w_hldr=None,
                    gripper=None, n_edges=8, length_scale=None, **limits) -> StabilityGrid:
    """Q over an (r_sprt, alpha) grid; cells with impossible geometry are flagged."""
    rs = np.atleast_1d(np.asarray(r_sprt_values, dtype=float))
    al = np.atleast_1d(np.asarray(alpha_values, dtype=float))
    if rs.size == 0 or al.size == 0:
        raise ValueError("empty grid")
    base = params if w_hldr is None else params.with_(w_hldr=w_hldr)
    Q = np.full((rs.size, al.size), np.nan)
    bad = np.zeros(Q.shape, dtype=bool)
    for i, r in enumerate(rs):
        p = base.with_(r_sprt=float(r))
        for j, a in enumerate(al):
            try:
                Q[i, j] = tool_stability(a, p, gripper, n_edges, length_scale, **limits)
            except DomainError:
                bad[i, j] = True
    return StabilityGrid(al, rs, Q, bad)
