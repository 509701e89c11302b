"""Force-guided tooltip insertion against a simulated chamfered hex socket.

Three stages: a linear approach until the axial force crosses a threshold, a
discretized spiral over the socket face until the force drops (the tip fell
onto the chamfer), then a rotation search under impedance control until the
hex aligns and the tip bottoms out.

Lengths in mm, forces in N, angles in degrees, time in s. Inertia ``m`` is in
kg and converted to N*s^2/mm internally.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, fields, replace

import numpy as np
from scipy.spatial.transform import Rotation

from .params import ConfigError, parse_config, parse_float

KG_TO_NS2_PER_MM = 1e-3


class NoContactError(RuntimeError):
    pass


class HoleNotFoundError(RuntimeError):
    pass


class InsertionTimeout(RuntimeError):
    def __init__(self, msg, result=None):
        super().__init__(msg)
        self.result = result


# ---------------------------------------------------------------------------
# world
# ---------------------------------------------------------------------------

@dataclass
class InsertionWorld:
    """Penalty-contact socket: flat face, conical chamfer, hex bore.

    The socket frame has z along the bore axis pointing out of the hole with
    the face at z = 0. The bore admits the tip only when the hex angle error
    (mod 60 deg) is within ``align_tol_deg``; otherwise the tip rests on a rim
    at the chamfer bottom.
    """

    socket_pos: np.ndarray = field(default_factory=lambda: np.zeros(3))
    R_socket: np.ndarray = field(default_factory=lambda: np.eye(3))
    hole_depth: float = 8.0
    hex_across_flats: float = 6.35
    chamfer_depth: float = 0.5
    chamfer_half_angle: float = 45.0
    surface_stiffness: float = 50.0
    clearance: float = 0.2            # radial play of the tip in the bore
    align_tol_deg: float = 1.5
    hex_offset_deg: float = 0.0       # initial tool-to-socket hex angle
    noise_std: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        self.socket_pos = np.asarray(self.socket_pos, dtype=float)
        self.R_socket = np.asarray(self.R_socket, dtype=float)
        for name in ("hole_depth", "hex_across_flats", "chamfer_depth",
                     "chamfer_half_angle", "surface_stiffness", "clearance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.chamfer_depth < self.hole_depth:
            raise ValueError("chamfer_depth must be less than hole_depth")
        if not 0 < self.chamfer_half_angle < 90:
            raise ValueError("chamfer_half_angle must be in (0, 90)")
        self._rng = np.random.default_rng(self.seed)

    @property
    def capture_radius(self) -> float:
        return self.clearance + self.chamfer_depth * math.tan(math.radians(self.chamfer_half_angle))

    @property
    def axis(self):
        return self.R_socket[:, 2]

    def to_local(self, P):
        return (np.asarray(P, dtype=float) - self.socket_pos) @ self.R_socket

    def aligned(self, yaw_deg) -> bool:
        e = (yaw_deg + self.hex_offset_deg) % 60.0
        return min(e, 60.0 - e) <= self.align_tol_deg

    def contact_force_batch(self, P, yaw_deg=0.0):
        """World-frame contact force on the tip for an (n, 3) batch of positions."""
        q = self.to_local(np.atleast_2d(P))
        x, y, z = q[:, 0], q[:, 1], q[:, 2]
        rho = np.hypot(x, y)
        with np.errstate(invalid="ignore", divide="ignore"):
            ux = np.where(rho > 0, x / rho, 0.0)
            uy = np.where(rho > 0, y / rho, 0.0)
        k = self.surface_stiffness
        h = math.radians(self.chamfer_half_angle)
        r_cap = self.capture_radius
        F = np.zeros_like(q)

        top = rho >= r_cap
        pen = np.where(top, -z, 0.0)
        F[:, 2] += np.where(top & (pen > 0), k * pen, 0.0)

        cham = (rho > self.clearance) & ~top
        zs = -(r_cap - rho) / math.tan(h)
        pen_n = np.where(cham, (zs - z) * math.sin(h), 0.0)
        hit = cham & (pen_n > 0)
        mag = np.where(hit, k * pen_n, 0.0)
        F[:, 0] += -mag * math.cos(h) * ux
        F[:, 1] += -mag * math.cos(h) * uy
        F[:, 2] += mag * math.sin(h)

        bore = rho <= self.clearance
        floor = -self.hole_depth if self.aligned(yaw_deg) else -self.chamfer_depth
        pen_b = np.where(bore, floor - z, 0.0)
        F[:, 2] += np.where(bore & (pen_b > 0), k * pen_b, 0.0)

        # bore wall below the chamfer
        wall = (z < -self.chamfer_depth) & (rho > self.clearance)
        pen_w = np.where(wall, rho - self.clearance, 0.0)
        F[:, 0] += -k * pen_w * ux
        F[:, 1] += -k * pen_w * uy
        return F @ self.R_socket.T

    def contact_force(self, P, yaw_deg=0.0):
        return self.contact_force_batch(np.asarray(P, float)[None, :], yaw_deg)[0]

    def sensor(self, P, yaw_deg=0.0, R_grpr=None):
        """Wrist force reading, expressed in the gripper frame."""
        F = self.contact_force(P, yaw_deg)
        if self.noise_std > 0:
            F = F + self._rng.normal(0.0, self.noise_std, 3)
        return F if R_grpr is None else np.asarray(R_grpr).T @ F

    def depth(self, P) -> float:
        return float(-self.to_local(P)[2])


# ---------------------------------------------------------------------------
# linear search
# ---------------------------------------------------------------------------

def _unit(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("zero vector")
    return v / n


def axial_force(F_world, v_att) -> float:
    return abs(float(np.dot(v_att, F_world)))


def linear_search(start, v_att, F_threshold, world: InsertionWorld, R_grpr=None,
                  step=0.05, max_travel=50.0, yaw_deg=0.0, log=None):
    """Advance along ``v_att`` until the axial contact force reaches the threshold."""
    if F_threshold <= 0:
        raise ValueError("F_threshold must be positive")
    v = np.asarray(v_att, dtype=float)
    if abs(np.linalg.norm(v) - 1) > 1e-9:
        raise ValueError("v_att must be a unit vector")
    R = np.eye(3) if R_grpr is None else np.asarray(R_grpr)
    P = np.asarray(start, dtype=float).copy()
    for i in range(int(max_travel / step) + 1):
        F = R @ world.sensor(P, yaw_deg, R)
        if log is not None:
            log.append("linear", P, F)
        if axial_force(F, v) >= F_threshold:
            return P
        P = P + step * v
    raise NoContactError(f"no contact within {max_travel} mm of travel")


# ---------------------------------------------------------------------------
# spiral
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpiralPlan:
    v_att: tuple = (0.0, 0.0, -1.0)
    v_sprl: tuple = (1.0, 0.0, 0.0)
    d_theta: float = 30.0
    d_r: float = 0.02
    theta_0: float = 0.0
    r_0: float = 0.0

    def __post_init__(self):
        a, s = np.asarray(self.v_att, float), np.asarray(self.v_sprl, float)
        if abs(np.linalg.norm(a) - 1) > 1e-9 or abs(np.linalg.norm(s) - 1) > 1e-9:
            raise ValueError("v_att and v_sprl must be unit vectors")
        if abs(a @ s) > 1e-9:
            raise ValueError("v_sprl must be perpendicular to v_att")
        if not (self.d_theta > 0 and self.d_r > 0):
            raise ValueError("spiral step sizes must be positive")
        if self.r_0 < 0:
            raise ValueError("r_0 must be non-negative")

    def theta(self, i):
        return self.theta_0 + i * self.d_theta

    def radius(self, i):
        return self.r_0 + i * self.d_r

    def pitch(self):
        """Approximate radial growth per revolution."""
        return self.d_r * (360.0 / self.d_theta) / (2 * math.sin(math.radians(self.d_theta) / 2))


def rodrigues(theta_deg, axis):
    return Rotation.from_rotvec(math.radians(theta_deg) * _unit(axis)).as_matrix()


def spiral_step(P_curr, plan: SpiralPlan, i):
    """Waypoint i+1 from waypoint i."""
    th, r = plan.theta(i + 1), plan.radius(i + 1)
    return r * rodrigues(th, plan.v_att) @ np.asarray(plan.v_sprl, float) + np.asarray(P_curr, float)


def spiral_waypoints(P_0, plan: SpiralPlan, n):
    pts = [np.asarray(P_0, dtype=float)]
    for i in range(n):
        pts.append(spiral_step(pts[-1], plan, i))
    return np.array(pts)


def spiral_search(P_0, plan: SpiralPlan, world: InsertionWorld, alignment_tolerance=0.05,
                  F_threshold=3.0, search_bound=5.0, R_grpr=None, yaw_deg=0.0,
                  expected_penetration=None, log=None):
    """Walk the spiral until the axial force falls below ``F_threshold``.

    Each segment is checked every ``alignment_tolerance`` mm. If ``P_0`` is
    already deeper than a face contact could explain, the tip is taken to sit
    in the chamfer and ``P_0`` is returned without moving.
    """
    R = np.eye(3) if R_grpr is None else np.asarray(R_grpr)
    v = np.asarray(plan.v_att, float)
    P_0 = np.asarray(P_0, dtype=float)
    if expected_penetration is None:
        expected_penetration = F_threshold / world.surface_stiffness + alignment_tolerance
    if world.depth(P_0) > expected_penetration + 0.05:
        return P_0

    def force(P):
        return R @ world.sensor(P, yaw_deg, R)

    F = force(P_0)
    if log is not None:
        log.append("spiral", P_0, F)
    if axial_force(F, v) < F_threshold:
        return P_0
    P, i = P_0, 0
    limit = search_bound + plan.pitch()
    while True:
        Q = spiral_step(P, plan, i)
        if np.linalg.norm(Q - P_0) > limit:
            raise HoleNotFoundError(f"spiral left the {search_bound} mm search bound")
        n = max(1, int(math.ceil(np.linalg.norm(Q - P) / alignment_tolerance)))
        s = (np.arange(1, n + 1) / n)[:, None]
        pts = P + s * (Q - P)
        F_all = world.contact_force_batch(pts, yaw_deg)
        if world.noise_std > 0:
            F_all = F_all + world._rng.normal(0.0, world.noise_std, F_all.shape)
        ax = np.abs(F_all @ v)
        below = np.nonzero(ax < F_threshold)[0]
        if below.size:
            j = below[0]
            if log is not None:
                log.append("spiral", pts[j], F_all[j])
            return pts[j]
        if log is not None:
            log.append("spiral", Q, F_all[-1])
        P, i = Q, i + 1


# ---------------------------------------------------------------------------
# impedance control
# ---------------------------------------------------------------------------

@dataclass
class ImpedanceState:
    P_prev: np.ndarray
    P_curr: np.ndarray
    m: float = 1.0            # kg
    c: float = 0.5            # N*s/mm
    k: float = 5.0            # N/mm
    dt: float = 0.008
    F_insrt: np.ndarray = field(default_factory=lambda: np.zeros(3))
    F_rsst: np.ndarray = field(default_factory=lambda: np.zeros(3))
    standard_damping: bool = False

    def __post_init__(self):
        self.P_prev = np.asarray(self.P_prev, dtype=float)
        self.P_curr = np.asarray(self.P_curr, dtype=float)
        self.F_insrt = np.asarray(self.F_insrt, dtype=float)
        self.F_rsst = np.asarray(self.F_rsst, dtype=float)
        if not (self.m > 0 and self.c > 0 and self.k > 0 and self.dt > 0):
            raise ValueError("m, c, k and dt must be positive")


def impedance_step(s: ImpedanceState):
    """Next hand position from the discrete impedance law.

    By default the damping term uses the previous position, ``c P_{i-1}/dt``;
    ``standard_damping`` swaps in ``c P_i/dt`` (backward-difference velocity).
    """
    m = s.m * KG_TO_NS2_PER_MM
    m_dt2, c_dt = m / s.dt ** 2, s.c / s.dt
    damp = s.P_curr if s.standard_damping else s.P_prev
    num = s.F_insrt + s.F_rsst + m_dt2 * (2 * s.P_curr - s.P_prev) + c_dt * damp + s.k * s.P_curr
    return num / (m_dt2 + c_dt + s.k)


def advance(s: ImpedanceState, P_next):
    s.P_prev, s.P_curr = s.P_curr, np.asarray(P_next, dtype=float)


def settle_against(s: ImpedanceState, world: InsertionWorld, n_steps, yaw_deg=0.0):
    """Run the loop for ``n_steps`` with the world supplying the resisting force."""
    for _ in range(n_steps):
        s.F_rsst = world.contact_force(s.P_curr, yaw_deg)
        advance(s, impedance_step(s))
    s.F_rsst = world.contact_force(s.P_curr, yaw_deg)
    return s


# ---------------------------------------------------------------------------
# rotation search
# ---------------------------------------------------------------------------

@dataclass
class TrajectoryLog:
    dt: float = 0.008
    rows: list = field(default_factory=list)

    def append(self, stage, P, F):
        n = len(self.rows)
        self.rows.append((n, n * self.dt, *map(float, P), *map(float, F), stage))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "t_s", "x_mm", "y_mm", "z_mm", "Fx_N", "Fy_N", "Fz_N", "stage"])
        for r in self.rows:
            w.writerow([r[0], f"{r[1]:.4f}", *(f"{v:.6f}" for v in r[2:8]), r[8]])
        return buf.getvalue()


@dataclass
class InsertionResult:
    success: bool
    final_position: np.ndarray
    final_depth: float
    net_rotation_deg: float
    steps: int
    axial_force: float
    stages: dict = field(default_factory=dict)
    log: TrajectoryLog | None = None

    def summary(self):
        return {
            "success": self.success, "final_depth_mm": self.final_depth,
            "net_rotation_deg": self.net_rotation_deg, "steps": self.steps,
            "axial_force_N": self.axial_force,
            "final_position_mm": [float(v) for v in self.final_position],
            "stages": self.stages,
        }


def rotation_search_insert(P_pre, world: InsertionWorld, controller: ImpedanceState,
                           omega=30.0, F_insert=5.0, sweep_deg=30.0, depth_tol=0.1,
                           force_tol=0.01, max_steps=6000, R_grpr=None, log=None):
    """Press along the socket axis and sweep the tool yaw until the hex drops in.

    Yaw only changes while the tip is blocked on the rim (axial force at least
    half the insertion force with little lateral load), and it is frozen once
    the tip is below the rim. Success is full depth with the axial force
    balance inside ``force_tol``.
    """
    R = np.eye(3) if R_grpr is None else np.asarray(R_grpr)
    v = -world.axis
    s = controller
    s.P_prev = np.asarray(P_pre, dtype=float).copy()
    s.P_curr = s.P_prev.copy()
    s.F_insrt = F_insert * v
    yaw, direction, locked = 0.0, 1.0, False
    rim_lock = world.chamfer_depth + 2 * F_insert / world.surface_stiffness
    d_yaw = omega * s.dt
    for n in range(max_steps):
        F = R @ world.sensor(s.P_curr, yaw, R)
        s.F_rsst = F
        ax = float(np.dot(F, -v))
        lat = float(np.linalg.norm(F - np.dot(F, v) * v))
        depth = world.depth(s.P_curr)
        if log is not None:
            log.append("rotation", s.P_curr, F)
        if depth >= world.hole_depth - depth_tol and abs(ax - F_insert) <= force_tol * F_insert:
            return InsertionResult(True, s.P_curr.copy(), depth, yaw, n, ax, log=log)
        if depth > rim_lock:
            locked = True
        if not locked and ax >= 0.5 * F_insert and lat <= 0.2 * ax:
            yaw += direction * d_yaw
            if yaw >= sweep_deg:
                yaw, direction = sweep_deg, -1.0
            elif yaw <= -sweep_deg:
                yaw, direction = -sweep_deg, 1.0
        advance(s, impedance_step(s))
    depth = world.depth(s.P_curr)
    res = InsertionResult(False, s.P_curr.copy(), depth, yaw, max_steps, float("nan"), log=log)
    raise InsertionTimeout(f"insertion not finished after {max_steps} steps", res)


def expected_rotation(hex_offset_deg) -> float:
    """Signed yaw to the nearest hex lattice angle (the minimal correction)."""
    e = hex_offset_deg % 60.0
    return -e if e <= 30.0 else 60.0 - e


# ---------------------------------------------------------------------------
# scenario
# ---------------------------------------------------------------------------

@dataclass
class InsertionScenario:
    """Controller and search settings for one simulated insertion."""

    start_height: float = 1.0
    offset_x: float = 2.0
    offset_y: float = 0.0
    hex_offset_deg: float = 0.0
    F_threshold: float = 3.0
    F_insert: float = 5.0
    linear_step: float = 0.05
    d_theta: float = 30.0
    d_r: float = 0.02
    search_bound: float = 5.0
    check_spacing: float = 0.05
    omega: float = 30.0
    m: float = 1.0
    c: float = 0.5
    k: float = 5.0
    dt: float = 0.008
    hole_depth: float = 8.0
    chamfer_depth: float = 0.5
    chamfer_half_angle: float = 45.0
    clearance: float = 0.2
    surface_stiffness: float = 50.0
    align_tol_deg: float = 1.5
    noise_std: float = 0.0
    max_steps: float = 6000
    seed: float = 0

    def world(self) -> InsertionWorld:
        return InsertionWorld(
            hole_depth=self.hole_depth, chamfer_depth=self.chamfer_depth,
            chamfer_half_angle=self.chamfer_half_angle, clearance=self.clearance,
            surface_stiffness=self.surface_stiffness, align_tol_deg=self.align_tol_deg,
            hex_offset_deg=self.hex_offset_deg, noise_std=self.noise_std, seed=int(self.seed))

    def with_(self, **kw):
        return replace(self, **kw)


SCENARIO_KEYS = tuple(f.name for f in fields(InsertionScenario))


def loads_scenario(text: str) -> InsertionScenario:
    import warnings
    top = parse_config(text)[0]
    vals = {}
    for key in top.values:
        if key not in SCENARIO_KEYS:
            warnings.warn(f"line {top.lines[key]}: unknown key {key!r} ignored", stacklevel=2)
            continue
        vals[key] = parse_float(top, key)
    try:
        sc = InsertionScenario(**vals)
        sc.world()
        return sc
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def run_insertion(sc: InsertionScenario, record=True) -> InsertionResult:
    """Linear, spiral and rotation stages end to end on the scenario's world."""
    world = sc.world()
    log = TrajectoryLog(sc.dt) if record else None
    v_att = -world.axis
    start = world.socket_pos + world.R_socket @ np.array(
        [sc.offset_x, sc.offset_y, sc.start_height])
    P0 = linear_search(start, v_att, sc.F_threshold, world, step=sc.linear_step, log=log)
    n_lin = len(log.rows) if log else 0
    plan = SpiralPlan(tuple(v_att), tuple(world.R_socket[:, 0]), sc.d_theta, sc.d_r)
    P_pre = spiral_search(P0, plan, world, sc.check_spacing, sc.F_threshold, sc.search_bound,
                          expected_penetration=sc.F_threshold / sc.surface_stiffness + sc.linear_step,
                          log=log)
    n_spi = (len(log.rows) - n_lin) if log else 0
    ctrl = ImpedanceState(P_pre, P_pre, sc.m, sc.c, sc.k, sc.dt)
    res = rotation_search_insert(P_pre, world, ctrl, sc.omega, sc.F_insert,
                                 max_steps=int(sc.max_steps), log=log)
    lateral = world.to_local(P_pre)[:2]
    res.stages = {"linear_stop": [float(v) for v in P0],
                  "pre_insertion": [float(v) for v in P_pre],
                  "alignment_error_mm": float(np.hypot(*lateral)),
                  "linear_samples": n_lin, "spiral_samples": n_spi}
    return res
