"""Event-driven simulation of directional billiard flows on wind-tree tables.

A table is a lattice-periodic array of centrally-symmetric rectilinear
obstacles.  The flow moves at unit speed and reflects elastically off the
axis-parallel obstacle sides, so a trajectory started in direction theta
stays in the four-element direction set {(+-cos theta, +-sin theta)} forever.
Directions are stored as a base angle plus two sign tags, never re-derived
from floats, so that invariant is exact.

Two engines are provided: a readable pure-Python ray tracer valid for any
admissible table (used for event-level queries and cross-checks), and a
numba kernel fast path for rectangle obstacles on a lattice with a
horizontal vector (the case all the large statistical ensembles need).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ._kernels import BIL_CORNER, BIL_MAXEVENTS, BIL_OK, BIL_PENETRATION, rect_flow
from .errors import (
    CornerHit,
    InsufficientData,
    NoEventWithinHorizon,
    NotAdmissible,
    PreconditionFail,
    UnsupportedLattice,
    WindtreeError,
)
from .geometry import LatticeBasis, RectilinearPolygon, is_admissible, make_rectangle

_CTOL = 1e-11  # corner-incidence tolerance (absolute, float mode)
_ETOL = 1e-12  # minimum positive event time


def _f(x) -> float:
    return float(x)


# ---------------------------------------------------------------------------
# table
# ---------------------------------------------------------------------------


@dataclass
class WindTreeTable:
    """Obstacle polygon repeated over a planar lattice.

    The tracer needs a lattice basis of the form ((w, 0), (sx, sy)); any
    basis containing a horizontal vector (possibly as an integer combination)
    is reduced to that shape.  Lattices with no horizontal vector are
    rejected."""

    lattice: LatticeBasis
    polygon: RectilinearPolygon
    check_admissible: bool = True

    def __post_init__(self):
        if self.check_admissible and not is_admissible(self.lattice, self.polygon):
            raise NotAdmissible("obstacle overlaps a lattice translate")
        u, v = self._horizontal_basis()
        self.w = _f(u[0])
        self.sx = _f(v[0])
        self.sy = _f(v[1])
        if self.w < 0:
            self.w = -self.w
        if self.sy < 0:
            self.sx, self.sy = -self.sx, -self.sy
        (lox, loy), (hix, hiy) = self.polygon.bbox()
        self.bb = (_f(lox), _f(loy), _f(hix), _f(hiy))
        self._edges = []
        for a, b in self.polygon.edges():
            ax, ay, bx, by = _f(a[0]), _f(a[1]), _f(b[0]), _f(b[1])
            if ax == bx:
                self._edges.append(("v", ax, min(ay, by), max(ay, by)))
            else:
                self._edges.append(("h", ay, min(ax, bx), max(ax, bx)))
        self.is_rectangle = len(self.polygon.vertices) == 4

    def _horizontal_basis(self):
        u, v = self.lattice.v1, self.lattice.v2
        if u[1] == 0:
            return u, v
        if v[1] == 0:
            return v, u
        # integer combination q*u - p*v is horizontal iff u_y/v_y = p/q in Q
        ratio = u[1] / v[1]
        if isinstance(ratio, Fraction):
            p, q = ratio.numerator, ratio.denominator
            h = (q * u[0] - p * v[0], q * u[1] - p * v[1])
            if h[0] != 0:
                return h, u
        raise UnsupportedLattice("lattice contains no horizontal vector")

    # lattice point of the obstacle copy with index (m, n)
    def obstacle_center(self, m: int, n: int) -> Tuple[float, float]:
        return (m * self.w + n * self.sx, n * self.sy)

    def point_in_obstacle(self, x: float, y: float) -> bool:
        n = round(y / self.sy)
        for nn in (n - 1, n, n + 1):
            cy = nn * self.sy
            if not (self.bb[1] - _CTOL <= y - cy <= self.bb[3] + _CTOL):
                continue
            m = round((x - nn * self.sx) / self.w)
            for mm in (m - 1, m, m + 1):
                cx = mm * self.w + nn * self.sx
                if self.polygon.contains((Fraction(x - cx).limit_denominator(10**12),
                                          Fraction(y - cy).limit_denominator(10**12))):
                    return True
        return False


def ehrenfest_table(lattice: LatticeBasis, a, b) -> WindTreeTable:
    """E(Lambda, a, b): an a x b rectangle centered at each lattice point."""
    return WindTreeTable(lattice, make_rectangle(a, b))


def lambda_lattice(lam) -> LatticeBasis:
    """The sheared lattice spanned by (1, 0) and (lam, 1)."""
    return LatticeBasis((Fraction(1), Fraction(0)), (lam, Fraction(1)))


# ---------------------------------------------------------------------------
# states and events
# ---------------------------------------------------------------------------


@dataclass
class BilliardState:
    """Position plus an exactly-tagged direction in Gamma_theta."""

    x: float
    y: float
    theta: float  # base angle, folded into [0, pi/2]
    tag_x: int = 1  # sign of the horizontal velocity component
    tag_y: int = 1
    time: float = 0.0

    def __post_init__(self):
        th = self.theta
        # fold an arbitrary angle into the first quadrant, moving the signs
        # into the tags so the four-direction set is explicit
        c, s = math.cos(th), math.sin(th)
        if c < 0:
            self.tag_x = -self.tag_x
        if s < 0:
            self.tag_y = -self.tag_y
        self.theta = math.atan2(abs(s), abs(c))

    @property
    def direction(self) -> Tuple[float, float]:
        return (self.tag_x * math.cos(self.theta), self.tag_y * math.sin(self.theta))

    def reflected(self, wall: str) -> "BilliardState":
        st = BilliardState(self.x, self.y, self.theta, self.tag_x, self.tag_y, self.time)
        if wall == "vertical":
            st.tag_x = -st.tag_x
        else:
            st.tag_y = -st.tag_y
        return st

    def advanced(self, dt: float) -> "BilliardState":
        dx, dy = self.direction
        return BilliardState(
            self.x + dx * dt, self.y + dy * dt, self.theta, self.tag_x, self.tag_y, self.time + dt
        )


@dataclass(frozen=True)
class ReflectionEvent:
    time: float
    point: Tuple[float, float]
    wall: str  # "horizontal" or "vertical"
    obstacle: Tuple[int, int]  # lattice coordinates of the obstacle copy


@dataclass
class Trajectory:
    events: List[ReflectionEvent]
    final_state: BilliardState


@dataclass
class DisplacementSeries:
    """Displacement from the start sampled on a uniform time grid."""

    times: np.ndarray
    disp: np.ndarray  # shape (n, 2)
    resampled: int = 0  # number of corner-hit restarts behind this series

    def __post_init__(self):
        if abs(self.disp[0, 0]) > 1e-12 or abs(self.disp[0, 1]) > 1e-12:
            raise PreconditionFail("first displacement sample must be zero")

    def running_max(self) -> np.ndarray:
        r = np.hypot(self.disp[:, 0], self.disp[:, 1])
        return np.maximum.accumulate(r)


# ---------------------------------------------------------------------------
# pure-Python event engine (general polygon)
# ---------------------------------------------------------------------------


def next_reflection(table: WindTreeTable, state: BilliardState, horizon: Optional[float] = None):
    """Earliest obstacle-side crossing along the ray from `state`.

    Returns (ReflectionEvent, new BilliardState).  Raises CornerHit if the
    ray meets a polygon corner within tolerance, NoEventWithinHorizon if the
    corridor is empty out to the (expanding) horizon."""
    dx, dy = state.direction
    cell = max(table.w, table.sy, table.bb[2] - table.bb[0], table.bb[3] - table.bb[1])
    h = horizon if horizon is not None else 4.0 * cell
    h_max = horizon if horizon is not None else 1e7 * cell
    while True:
        hit = _ray_scan(table, state.x, state.y, dx, dy, h)
        if hit is not None:
            t, px, py, wall, mn = hit
            ev = ReflectionEvent(state.time + t, (px, py), wall, mn)
            st = state.advanced(t).reflected(wall)
            st.x, st.y = px, py
            return ev, st
        if h >= h_max:
            raise NoEventWithinHorizon(f"no reflection within {h:g}")
        h = min(2.0 * h, h_max)


def _ray_scan(table, x, y, dx, dy, h):
    """Best (t, px, py, wall, (m, n)) hit with t in (ETOL, h], or None."""
    w, sx, sy = table.w, table.sx, table.sy
    loy, hiy = table.bb[1], table.bb[3]
    best = None
    y0, y1 = y, y + dy * h
    if y0 > y1:
        y0, y1 = y1, y0
    n_lo = math.floor((y0 - hiy) / sy)
    n_hi = math.ceil((y1 - loy) / sy)
    for n in range(n_lo, n_hi + 1):
        # time window during which the ray's y is inside this row's band
        band_lo, band_hi = n * sy + loy, n * sy + hiy
        if dy != 0.0:
            t0 = (band_lo - y) / dy
            t1 = (band_hi - y) / dy
            if t0 > t1:
                t0, t1 = t1, t0
            t0, t1 = max(t0, 0.0), min(t1, h)
            if t0 > t1:
                continue
        else:
            if not (band_lo <= y <= band_hi):
                continue
            t0, t1 = 0.0, h
        xa, xb = x + dx * t0, x + dx * t1
        if xa > xb:
            xa, xb = xb, xa
        m_lo = math.floor((xa - (n * sx + table.bb[2])) / w)
        m_hi = math.ceil((xb - (n * sx + table.bb[0])) / w)
        for m in range(m_lo, m_hi + 1):
            cx, cy = m * w + n * sx, n * sy
            cand = _hit_copy(table, x - cx, y - cy, dx, dy, h)
            if cand is None:
                continue
            t, lx, ly, wall = cand
            if best is None or t < best[0]:
                best = (t, lx + cx, ly + cy, wall, (m, n))
    return best


def _hit_copy(table, x, y, dx, dy, h):
    """Earliest edge crossing of the obstacle copy at the origin."""
    best = None
    for kind, c, lo, hi in table._edges:
        if kind == "v":
            if dx == 0.0:
                continue
            t = (c - x) / dx
            if t <= _ETOL or t > h:
                continue
            u = y + dy * t
            wall = "vertical"
        else:
            if dy == 0.0:
                continue
            t = (c - y) / dy
            if t <= _ETOL or t > h:
                continue
            u = x + dx * t
            wall = "horizontal"
        if u < lo - _CTOL or u > hi + _CTOL:
            continue
        if best is not None and t >= best[0]:
            continue
        if u < lo + _CTOL or u > hi - _CTOL:
            raise CornerHit(f"ray meets an obstacle corner at t={t:g}")
        if wall == "vertical":
            best = (t, c, u, wall)
        else:
            best = (t, u, c, wall)
    return best


def flow(table: WindTreeTable, state: BilliardState, t_max: float, max_events: int = 10**7) -> Trajectory:
    """Concatenated next_reflection steps until t_max or max_events."""
    events: List[ReflectionEvent] = []
    t_end = state.time + t_max
    st = state
    while len(events) < max_events:
        try:
            ev, nxt = next_reflection(table, st)
        except NoEventWithinHorizon:
            break
        if ev.time > t_end:
            break
        events.append(ev)
        st = nxt
    return Trajectory(events, st.advanced(t_end - st.time))


# ---------------------------------------------------------------------------
# ensembles: displacement series, diffusion exponent, recurrence
# ---------------------------------------------------------------------------


def _to_kernel(table, x, y):
    """Map original coordinates into the kernel's reduced frame."""
    kx = (x - table.bb[0]) / table.w
    ky = (y - table.bb[1]) / table.sy
    return kx, ky


def _kernel_params(table):
    a = (table.bb[2] - table.bb[0]) / table.w
    b = (table.bb[3] - table.bb[1]) / table.sy
    shear = table.sx / table.w
    return a, b, shear


def _series_kernel(table, x0, theta, T, dt, do_rec=False, radius=1.0, tmin_rec=0.0,
                   max_events=None):
    st = BilliardState(x0[0], x0[1], theta)
    dx, dy = st.direction
    kx, ky = _to_kernel(table, st.x, st.y)
    a, b, shear = _kernel_params(table)
    ts = np.arange(0.0, T + dt * 0.5, dt)
    xs = np.empty_like(ts)
    ys = np.empty_like(ts)
    if max_events is None:
        max_events = int(20 * T / min(table.w, table.sy) + 10**6)
    status, rec, _ = rect_flow(
        kx, ky, dx / table.w, dy / table.sy, a, b, shear, float(T) + 1e-9,
        ts, xs, ys, 1 if do_rec else 0, float(tmin_rec), float(radius),
        table.w, table.sy, max_events,
    )
    if status == BIL_CORNER:
        raise CornerHit("kernel trajectory met an obstacle corner")
    if status == BIL_MAXEVENTS:
        raise WindtreeError("event budget exhausted")
    if status == BIL_PENETRATION:
        raise PreconditionFail("start position inside an obstacle")
    disp = np.column_stack([(xs - kx) * table.w, (ys - ky) * table.sy])
    return DisplacementSeries(ts, disp), bool(rec)


def _series_python(table, x0, theta, T, dt):
    st = BilliardState(x0[0], x0[1], theta)
    traj = flow(table, st, T)
    ts = np.arange(0.0, T + dt * 0.5, dt)
    pts = np.empty((len(ts), 2))
    cur = BilliardState(x0[0], x0[1], theta)
    i = 0
    for ev in traj.events:
        while i < len(ts) and ts[i] <= ev.time:
            tau = ts[i] - cur.time
            d = cur.direction
            pts[i] = (cur.x + d[0] * tau, cur.y + d[1] * tau)
            i += 1
        cur = BilliardState(ev.point[0], ev.point[1], cur.theta, cur.tag_x, cur.tag_y, ev.time)
        if ev.wall == "vertical":
            cur.tag_x = -cur.tag_x
        else:
            cur.tag_y = -cur.tag_y
    while i < len(ts):
        tau = ts[i] - cur.time
        d = cur.direction
        pts[i] = (cur.x + d[0] * tau, cur.y + d[1] * tau)
        i += 1
    disp = pts - np.array([x0[0], x0[1]])
    return DisplacementSeries(ts, disp)


def displacement_series(table: WindTreeTable, x0, theta: float, T: float, dt: float,
                        seed: Optional[int] = None, resample_radius: float = 0.25,
                        max_resamples: int = 50) -> DisplacementSeries:
    """Sample position - x0 on the grid {0, dt, ..., T}.

    Corner-hitting starts are resampled uniformly within resample_radius of
    x0 (the substitution count is recorded on the series)."""
    rng = np.random.default_rng(seed)
    x, y = float(x0[0]), float(x0[1])
    fast = table.is_rectangle
    for k in range(max_resamples + 1):
        try:
            if fast:
                ser, _ = _series_kernel(table, (x, y), theta, T, dt)
            else:
                ser = _series_python(table, (x, y), theta, T, dt)
            ser.resampled = k
            return ser
        except (CornerHit, PreconditionFail):
            ang = rng.uniform(0.0, 2.0 * math.pi)
            r = rng.uniform(0.0, resample_radius)
            x = float(x0[0]) + r * math.cos(ang)
            y = float(x0[1]) + r * math.sin(ang)
    raise CornerHit("all resampled starts hit corners")


def diffusion_exponent(series: Sequence[DisplacementSeries]) -> Tuple[float, float]:
    """Polynomial growth rate of the running-max displacement.

    Per-series least-squares slope of log max_{s<=t}|disp(s)| against log t
    over the upper two decades of t, averaged over the ensemble."""
    if len(series) < 30:
        raise InsufficientData("need at least 30 series")
    slopes = []
    for ser in series:
        ts = ser.times
        pos = ts > 0
        if not pos.any() or ts[-1] <= 0:
            raise InsufficientData("empty time grid")
        t_lo_grid = ts[pos].min()
        if ts[-1] / t_lo_grid < 1e3:
            raise InsufficientData("time grid must span at least 3 decades")
        r = ser.running_max()
        mask = pos & (ts >= ts[-1] / 100.0)
        rm = r[mask]
        if rm.max() == 0.0:
            slopes.append(0.0)
            continue
        good = rm > 0
        if good.sum() < 4:
            raise InsufficientData("too few nonzero samples in the fit window")
        slopes.append(float(np.polyfit(np.log(ts[mask][good]), np.log(rm[good]), 1)[0]))
    arr = np.asarray(slopes)
    n = len(arr)
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0


def diffusion_ensemble(table: WindTreeTable, n_orbits: int, T: float, dt: float,
                       seed: int, theta: Optional[float] = None,
                       start_box: float = 0.2) -> List[DisplacementSeries]:
    """Ensemble of displacement series from random starts (and random
    directions unless theta is fixed)."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n_orbits:
        th = theta if theta is not None else rng.uniform(0.05, math.pi / 2 - 0.05)
        x = table.bb[2] + rng.uniform(0.01, start_box)
        y = table.bb[3] + rng.uniform(0.01, start_box)
        try:
            out.append(displacement_series(table, (x, y), th, T, dt,
                                           seed=int(rng.integers(1 << 62))))
        except (CornerHit, WindtreeError):
            continue
    return out


def series_recurrence_fraction(series: Sequence[DisplacementSeries], radius: float,
                               t_min: float) -> float:
    """Fraction of series re-entering the radius-ball about their start at
    some sample time >= t_min (sampled proxy for the exact segment test)."""
    n_rec = 0
    for ser in series:
        r = np.hypot(ser.disp[:, 0], ser.disp[:, 1])
        if bool(((ser.times >= t_min) & (r <= radius)).any()):
            n_rec += 1
    return n_rec / len(series)


def recurrence_fraction(table: WindTreeTable, theta: float, n_orbits: int, T: float,
                        radius: float, seed: int = 0) -> float:
    """Fraction of orbits whose path after time T/10 re-enters the
    radius-ball about the start (exact segment test along the trajectory)."""
    if not table.is_rectangle:
        raise PreconditionFail("recurrence ensemble needs the rectangle fast path")
    rng = np.random.default_rng(seed)
    n_rec = 0
    done = 0
    attempts = 0
    dt = max(T / 64.0, 1.0)
    while done < n_orbits:
        attempts += 1
        if attempts > 20 * n_orbits:
            raise WindtreeError("too many corner-hit resamples")
        x = table.bb[2] + rng.uniform(0.01, 0.2)
        y = table.bb[3] + rng.uniform(0.01, 0.2)
        try:
            _, rec = _series_kernel(table, (x, y), theta, T, dt,
                                    do_rec=True, radius=radius, tmin_rec=T / 10.0)
        except (CornerHit, PreconditionFail):
            continue
        n_rec += int(rec)
        done += 1
    return n_rec / n_orbits
