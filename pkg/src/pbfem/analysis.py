"""Error norms, convergence-order estimation, and refinement-study records.

Also hosts the two rough interpolation targets (a nested step function and
a Weierstrass-type sum) used to measure projection orders for functions of
low smoothness.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .quadrature import gauss_legendre

__all__ = [
    "StudyRow",
    "ConvergenceStudy",
    "control_error",
    "estimate_order",
    "optimality_gap",
    "weierstrass",
    "nested_step",
]

CSV_HEADER = "h,n_elements,p,omega,tau,F_h,r_feas,g_opt,err_l2,iters,wall_time_s"


@dataclass(frozen=True)
class StudyRow:
    h: float
    n_elements: int
    p: int
    omega: float
    tau: float
    F_h: float
    r_feas: float
    g_opt: float | None
    err_l2: float | None
    iters: int
    wall_time_s: float
    status: str = "converged"

    def csv_line(self) -> str:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, int):
                return str(v)
            return repr(float(v))

        return ",".join(
            fmt(v)
            for v in (
                self.h, self.n_elements, self.p, self.omega, self.tau,
                self.F_h, self.r_feas, self.g_opt, self.err_l2,
                self.iters, self.wall_time_s,
            )
        )


@dataclass
class ConvergenceStudy:
    """Rows of one mesh-refinement sweep, coarsest first."""

    problem: str
    method: str
    rows: list = field(default_factory=list)

    def add(self, row: StudyRow):
        if self.rows and row.h > self.rows[-1].h:
            raise InputError("study rows must be ordered by decreasing h")
        self.rows.append(row)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for row in self.rows:
            buf.write(row.csv_line() + "\n")
        return buf.getvalue()

    def plot_data(self) -> str:
        """Two whitespace-separated columns per series (h value), log-log
        ready: r_feas, then g_opt and err_l2 when present."""
        series = [("r_feas", lambda r: r.r_feas)]
        if any(r.g_opt is not None for r in self.rows):
            series.append(("g_opt", lambda r: r.g_opt))
        if any(r.err_l2 is not None for r in self.rows):
            series.append(("err_l2", lambda r: r.err_l2))
        buf = io.StringIO()
        for name, get in series:
            buf.write(f"# {self.problem} {self.method} {name}\n")
            buf.write("# h value\n")
            for row in self.rows:
                v = get(row)
                if v is not None:
                    buf.write(f"{row.h!r} {float(v)!r}\n")
            buf.write("\n")
        return buf.getvalue()

    def order(self, column: str = "r_feas") -> float:
        pairs = [
            (r.h, getattr(r, column))
            for r in self.rows
            if getattr(r, column) is not None and getattr(r, column) > 0.0
        ]
        return estimate_order(pairs)


def control_error(trajectory, reference, interval, norm: str = "l2",
                  problem=None) -> float:
    """Weighted norm of the control mismatch on a sub-interval.

    ``trajectory`` is either a callable returning control samples or a
    Trajectory paired with a ``problem`` that registers a control
    extractor.  The integral runs over the trajectory mesh restricted to
    ``interval`` with a 2p+4 point Gauss rule per element.
    """
    norm = norm.lower()
    if norm not in ("l2", "l1"):
        raise InputError("norm must be 'l2' or 'l1'")
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise InputError("interval must have positive length")
    from .mesh import Trajectory

    if callable(trajectory) and not isinstance(trajectory, Trajectory):
        u_h = trajectory
        mesh_nodes = np.linspace(a, b, 65)
        p = 5
    else:
        if problem is None:
            raise InputError("a Trajectory argument requires the problem")
        from .benchmarks import control_values

        space = trajectory.space
        if not (space.mesh.t0 <= a and b <= space.mesh.tE + 1e-12):
            raise InputError("interval must lie within the trajectory horizon")
        u_h = lambda t: control_values(problem, trajectory, t)
        cuts = space.mesh.nodes
        inner = cuts[(cuts > a) & (cuts < b)]
        mesh_nodes = np.concatenate(([a], inner, [b]))
        p = space.p
    rule = gauss_legendre(2 * p + 4)
    total = 0.0
    for lo, hi in zip(mesh_nodes[:-1], mesh_nodes[1:]):
        t, w = rule.mapped(lo, hi)
        diff = np.asarray(u_h(t), dtype=float) - np.asarray(reference(t), dtype=float)
        if norm == "l2":
            total += float(w @ diff**2)
        else:
            total += float(w @ np.abs(diff))
    return math.sqrt(total) if norm == "l2" else total


def estimate_order(errors) -> float:
    """Least-squares slope of log(error) against log(h)."""
    pts = [(float(h), float(e)) for h, e in errors]
    if len(pts) < 2:
        raise InputError("need at least two (h, error) pairs")
    hs = np.array([h for h, _ in pts])
    es = np.array([e for _, e in pts])
    if np.any(hs <= 0.0) or len(np.unique(hs)) < 2:
        raise InputError("h values must be positive and not all equal")
    if np.any(es <= 0.0):
        raise InputError("errors must be positive for a log-log fit")
    slope = np.polyfit(np.log(hs), np.log(es), 1)[0]
    return float(slope)


def optimality_gap(F_h: float, F_reference: float) -> float:
    """max(F_h - F_reference, 0); clamped so infeasible super-optimal
    iterates do not report a negative gap."""
    if not math.isfinite(F_reference):
        raise InputError("reference objective must be finite")
    return max(float(F_h) - float(F_reference), 0.0)


def weierstrass(t, a: float, n_terms: int | None = None):
    """0.5 * sum a^k cos(7^k pi t), truncated below double-precision
    resolution by default."""
    if not 0.0 < a <= 0.5:
        raise InputError("a must lie in (0, 0.5]")
    if n_terms is None:
        n_terms = int(math.ceil(math.log(1e-16) / math.log(a))) + 1
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for k in range(n_terms):
        out += a**k * np.cos(7.0**k * np.pi * t)
    out *= 0.5
    return out if out.ndim else float(out)


def nested_step(t, k: int):
    """Step function on (-1, 1) flipping sign each time t passes
    1 - 2^{-j} for j = 1..k; starts at -1."""
    if k < 0:
        raise InputError("k must be nonnegative")
    t = np.asarray(t, dtype=float)
    if np.any(t <= -1.0) or np.any(t >= 1.0):
        raise InputError("t must lie in (-1, 1)")
    flips = np.zeros(t.shape, dtype=int)
    for j in range(1, k + 1):
        flips += (t > 1.0 - 2.0**-j).astype(int)
    out = -np.ones(t.shape) * (-1.0) ** flips
    return out if out.ndim else float(out)
