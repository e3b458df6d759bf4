"""
Pole-aware contour construction and complex quadrature along the routed
contour. Every kernel integral in cvk goes through ``route_contour`` and
``integrate_along``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad_vec

from ..errors import ContourBlocked, ExtrapolationUnstable, NoConvergence, NonFiniteSample
from .qseries import csum

logger = logging.getLogger(__name__)

ComplexValue = complex

SCALE_SAMPLES = 17             # integrand samples used to size the truncation window
ORACLE_ORDER = 20              # Gauss-Legendre points per oracle panel


def ensure_finite(value, what: str = "value") -> complex:
    """Return value as complex, raising NonFiniteSample on NaN/Inf"""
    value = complex(value)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise NonFiniteSample(f"{what} is not finite: {value}")
    return value


class Orientation(Enum):
    UPWARD = "upward"
    DOWNWARD = "downward"


@dataclass(frozen=True)
class PoleSequence:
    """Semi-infinite lattice anchor +- i(m step_b + l step_binv), m, l >= 0"""
    anchor: complex
    orientation: Orientation
    step_b: float
    step_binv: float
    label: str = ""

    def __post_init__(self):
        if not (self.step_b > 0 and self.step_binv > 0):
            raise ValueError(f"pole sequence {self.label!r} needs positive steps")
        object.__setattr__(self, "anchor", ensure_finite(self.anchor, f"anchor of {self.label!r}"))

    @property
    def sign(self) -> int:
        return 1 if self.orientation is Orientation.UPWARD else -1

    def lattice(self, count: int) -> List[Tuple[float, int, int]]:
        """(offset, m, l) of the count members closest to the anchor, by offset"""
        reach = math.sqrt(2.0 * count * self.step_b * self.step_binv) + self.step_b + self.step_binv
        m, l = np.meshgrid(np.arange(int(reach / self.step_b) + 2),
                           np.arange(int(reach / self.step_binv) + 2), indexing="ij")
        m, l = m.ravel(), l.ravel()
        offsets = m * self.step_b + l * self.step_binv
        order = np.argsort(offsets, kind="stable")[:count]
        return [(float(offsets[i]), int(m[i]), int(l[i])) for i in order]

    def members(self, count: int = 100) -> np.ndarray:
        """The count members closest to the anchor"""
        offsets = np.array([entry[0] for entry in self.lattice(count)])
        return self.anchor + self.sign * 1j * offsets

    def member(self, offset: float) -> complex:
        return self.anchor + self.sign * 1j * offset

    def shifted(self, delta: complex) -> "PoleSequence":
        return replace(self, anchor=self.anchor + delta)


@dataclass(frozen=True)
class ContourPath:
    """
    Piecewise-linear path from -inf + i left_height to +inf + i right_height
    through the given vertices. An empty vertex list is a horizontal line.

    Outside the vertices the tails climb by ``left_slope`` / ``right_slope``
    per unit of |Re x| travelled outward; negative slopes descend.
    """
    vertices: Tuple[complex, ...] = ()
    left_height: float = 0.0
    right_height: float = 0.0
    left_slope: float = 0.0
    right_slope: float = 0.0

    def __post_init__(self):
        verts = tuple(ensure_finite(v, "contour vertex") for v in self.vertices)
        for a, b in zip(verts, verts[1:]):
            if not b.real > a.real:
                raise ValueError("contour vertices need strictly increasing real parts")
        object.__setattr__(self, "vertices", verts)
        if not self.vertices and self.left_height != self.right_height:
            raise ValueError("a path without vertices must be a single horizontal line")
        if not self.vertices and (self.left_slope or self.right_slope):
            raise ValueError("tilted tails need at least one vertex to start from")

    def height_at(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.vertices:
            return np.full_like(x, self.left_height)
        re = np.array([v.real for v in self.vertices])
        im = np.array([v.imag for v in self.vertices])
        inside = np.interp(x, re, im)
        left = self.left_height + self.left_slope * (re[0] - x)
        right = self.right_height + self.right_slope * (x - re[-1])
        return np.where(x < re[0], left, np.where(x > re[-1], right, inside))

    def with_tails(self, reach: float, left_slope: float = 0.0, right_slope: float = 0.0) -> "ContourPath":
        """
        Same path pinned at Re x = -reach and +reach, with the tails beyond
        tilted. ``reach`` must lie outside every vertex and every pole anchor.
        """
        if reach <= self.core_extent():
            raise ValueError(f"tail reach {reach} must exceed the core extent {self.core_extent()}")
        pins = (complex(-reach, self.left_height),) + self.vertices + (complex(reach, self.right_height),)
        return ContourPath(pins, self.left_height, self.right_height, left_slope, right_slope)

    def polyline(self, extent: float) -> List[complex]:
        """Corner points of the path truncated to |Re x| <= extent"""
        if not self.vertices:
            return [complex(-extent, self.left_height), complex(extent, self.left_height)]
        first, last = self.vertices[0], self.vertices[-1]
        if extent <= max(abs(first.real), abs(last.real)):
            raise ValueError(f"truncation extent {extent} does not cover the path vertices")
        left_end = self.left_height + self.left_slope * (first.real + extent)
        right_end = self.right_height + self.right_slope * (extent - last.real)
        points = [complex(-extent, left_end), complex(first.real, self.left_height)]
        points.extend(self.vertices)
        points.extend([complex(last.real, self.right_height), complex(extent, right_end)])
        deduped = [points[0]]
        for p in points[1:]:
            if abs(p - deduped[-1]) > 1e-15:
                deduped.append(p)
        return deduped

    def core_extent(self) -> float:
        if not self.vertices:
            return 0.0
        return max(abs(v.real) for v in self.vertices)

    def separates(self, upward: Sequence[PoleSequence], downward: Sequence[PoleSequence],
                  clearance: float, count: int = 100) -> bool:
        """Check every sampled member sits on its side at vertical distance >= clearance"""
        slack = 1e-12
        for seq in upward:
            pts = seq.members(count)
            if np.any(self.height_at(pts.real) > pts.imag - clearance + slack):
                return False
        for seq in downward:
            pts = seq.members(count)
            if np.any(self.height_at(pts.real) < pts.imag + clearance - slack):
                return False
        return True


@dataclass(frozen=True)
class QuadratureSettings:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 4000
    decay_rate: float = 2.0 * math.pi     # 1/length, exponential decay of |integrand|
    truncation_margin: float = 1e-2

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("rel_tol and abs_tol must be positive")
        if not self.decay_rate > 0:
            raise ValueError("decay_rate must be positive")
        if self.max_subdivisions < 1 or not self.truncation_margin > 0:
            raise ValueError("max_subdivisions >= 1 and truncation_margin > 0 required")

    def with_decay(self, rate: float) -> "QuadratureSettings":
        return replace(self, decay_rate=rate)


@dataclass
class _Constraint:
    lo: float
    hi: float
    upper: float = math.inf      # path must stay at or below
    lower: float = -math.inf     # path must stay at or above
    label: str = ""


def route_contour(upward: Sequence[PoleSequence], downward: Sequence[PoleSequence],
                  strip: Tuple[float, float], clearance: float) -> ContourPath:
    """
    Route a path between upward and downward pole sequences.

    The default is the horizontal line through the middle of the strip.
    Wherever an anchor comes closer than ``clearance`` to that line the path
    takes a piecewise-linear notch passing below upward anchors and above
    downward anchors by exactly ``clearance``.
    """
    low, high = strip
    if not low < high:
        raise ValueError(f"strip lower bound {low} must be below upper bound {high}")
    if not clearance > 0:
        raise ValueError("clearance must be positive")
    base = 0.5 * (low + high)

    constraints = []
    for seq in upward:
        a = seq.anchor
        constraints.append(_Constraint(a.real - clearance, a.real + clearance,
                                       upper=a.imag - clearance, label=seq.label))
    for seq in downward:
        a = seq.anchor
        constraints.append(_Constraint(a.real - clearance, a.real + clearance,
                                       lower=a.imag + clearance, label=seq.label))

    if all(c.upper >= base and c.lower <= base for c in constraints):
        return ContourPath((), base, base)

    breaks = sorted({c.lo for c in constraints} | {c.hi for c in constraints})
    heights = []
    for left, right in zip(breaks, breaks[1:]):
        mid = 0.5 * (left + right)
        active = [c for c in constraints if c.lo <= mid <= c.hi]
        upper = min((c.upper for c in active), default=math.inf)
        lower = max((c.lower for c in active), default=-math.inf)
        if lower > upper:
            ups = [c.label for c in active if c.upper < math.inf]
            downs = [c.label for c in active if c.lower > -math.inf]
            raise ContourBlocked(
                f"upward {ups} and downward {downs} sequences overlap near Re x = {mid:.6g}")
        heights.append(min(max(base, lower), upper))

    if all(abs(h - base) < 1e-15 for h in heights):
        return ContourPath((), base, base)

    vertices = [complex(breaks[0] - clearance / 8.0, base)]
    for (left, right), h in zip(zip(breaks, breaks[1:]), heights):
        tau = min(clearance / 8.0, (right - left) / 4.0)
        vertices.append(complex(left + tau, h))
        vertices.append(complex(right - tau, h))
    vertices.append(complex(breaks[-1] + clearance / 8.0, base))
    logger.debug("routed contour with %d vertices around base height %.6g", len(vertices), base)
    return ContourPath(tuple(vertices), base, base)


def crossing_counts(upward: Sequence[PoleSequence], downward: Sequence[PoleSequence], clearance: float,
                    extract: Orientation, gap_factor: float = 4.0) -> Dict[str, int]:
    """
    Members to take out of their sequence before any path can separate the
    two families, keyed by sequence label.

    For every sequence of orientation ``extract`` the members sitting on the
    wrong side of an anchor of the other orientation within 2*clearance in
    Re x are counted, then the count grows while the next gap is narrower
    than gap_factor clearances. Sequences with nothing to extract are omitted.
    """
    movable, blocking = (upward, downward) if extract is Orientation.UPWARD else (downward, upward)
    counts = {}
    for seq in movable:
        a = seq.anchor
        near = [s.anchor.imag for s in blocking if abs(s.anchor.real - a.real) < 2.0 * clearance]
        if not near:
            continue
        if extract is Orientation.UPWARD:
            depth = max(near) + 2.0 * clearance - a.imag
        else:
            depth = a.imag - min(near) + 2.0 * clearance
        if depth <= 0:
            continue
        size = 8
        lattice = seq.lattice(size)
        while lattice[-1][0] < depth + gap_factor * clearance:
            size *= 2
            lattice = seq.lattice(size)
        count = sum(1 for offset, _, _ in lattice if offset < depth)
        while count < len(lattice) - 1 and lattice[count][0] - lattice[count - 1][0] < gap_factor * clearance:
            count += 1
        counts[seq.label] = count
        logger.debug("%d members of %s cross an opposite anchor", count, seq.label)
    return counts


def truncation_extent(f: Callable[[complex], complex], path: ContourPath,
                      settings: QuadratureSettings, core: Optional[float] = None) -> float:
    """
    Half-width T of the integration window: beyond T0 (the pole core) the
    decay bound e^{-decay_rate (T - T0)} times the integrand scale falls below
    truncation_margin * abs_tol.
    """
    t0 = core if core is not None else path.core_extent() + 1.0
    t0 = max(t0, path.core_extent() + 1.0)
    xs = np.linspace(-t0, t0, SCALE_SAMPLES)
    zs = xs + 1j * path.height_at(xs)
    scale = 0.0
    for z in zs:
        scale = max(scale, abs(ensure_finite(f(complex(z)), f"integrand at x={z}")))
    ratio = max(scale, 1e-300) / (settings.truncation_margin * settings.abs_tol)
    tail = max(1.0, math.log(ratio) / settings.decay_rate) if ratio > 1 else 1.0
    return t0 + tail


def integrate_along(f: Callable[[complex], complex], path: ContourPath,
                    settings: QuadratureSettings, core: Optional[float] = None) -> Tuple[complex, float]:
    """
    Adaptive Gauss-Kronrod quadrature of f along the truncated path.

    Each straight segment is integrated with ``scipy.integrate.quad_vec`` on
    the real and imaginary parts. Returns (value, error estimate).
    """
    extent = truncation_extent(f, path, settings, core)
    points = path.polyline(extent)
    n_seg = len(points) - 1
    values, errors = [], []
    for start, end in zip(points, points[1:]):
        delta = end - start

        def segment(s, start=start, delta=delta):
            x = start + delta * s
            v = complex(f(x)) * delta
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise NonFiniteSample(f"integrand not finite at x={x}")
            return np.array([v.real, v.imag])

        res, err, info = quad_vec(segment, 0.0, 1.0, epsabs=settings.abs_tol / n_seg,
                                  epsrel=settings.rel_tol, limit=settings.max_subdivisions,
                                  full_output=True)
        if info.status == 1:
            raise NoConvergence(
                f"segment {start:.4g} -> {end:.4g} needs more than {settings.max_subdivisions} subdivisions")
        if info.status == 2:
            raise NonFiniteSample(f"non-finite samples on segment {start:.4g} -> {end:.4g}")
        values.append(complex(res[0], res[1]))
        errors.append(float(err))
    logger.debug("integrated %d segments over |Re x| <= %.3g", n_seg, extent)
    return csum(values), math.fsum(errors)


def fixed_rule_integral(f: Callable[[np.ndarray], np.ndarray], path: ContourPath,
                        settings: QuadratureSettings, core: Optional[float] = None,
                        panels_per_unit: int = 8) -> complex:
    """
    Fixed Gauss-Legendre rule on the same truncated path, widened by half.
    f must accept numpy arrays. Serves as the independent high-density oracle.
    """
    scalar = lambda z: complex(np.asarray(f(np.array([z])))[0])
    extent = 1.5 * truncation_extent(scalar, path, settings, core)
    points = path.polyline(extent)
    x, w = np.polynomial.legendre.leggauss(ORACLE_ORDER)
    parts = []
    for start, end in zip(points, points[1:]):
        delta = end - start
        n_panels = max(1, int(math.ceil(abs(delta) * panels_per_unit)))
        edges = np.linspace(0.0, 1.0, n_panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        s = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
        vals = np.asarray(f(start + delta * s), dtype=complex)
        if not np.all(np.isfinite(vals)):
            raise NonFiniteSample(f"oracle samples not finite on segment {start:.4g} -> {end:.4g}")
        parts.append(complex(np.dot(vals, weights) * delta))
    return csum(parts)


def residue_sum(residues: Sequence[complex]) -> complex:
    """Compensated sum of precomputed (-2 pi i) Res terms"""
    return csum(residues)


def richardson_extrapolate(samples: Sequence[complex], ratio: float = 2.0,
                           floor: float = 1e-13) -> Tuple[complex, List[List[complex]]]:
    """
    Extrapolate samples f(h), f(h/ratio), f(h/ratio^2), ... to h = 0 with the
    repeated order-one Richardson tableau. Returns (estimate, tableau).

    Raises ExtrapolationUnstable when the successive differences of the raw
    samples grow instead of shrinking.
    """
    values = [complex(v) for v in samples]
    if len(values) < 2:
        raise ValueError("Richardson extrapolation needs at least two samples")
    diffs = [abs(b - a) for a, b in zip(values, values[1:])]
    for prev, nxt in zip(diffs, diffs[1:]):
        if nxt > prev and nxt > floor * max(1.0, abs(values[-1])):
            raise ExtrapolationUnstable(
                f"sample differences {', '.join(f'{d:.3g}' for d in diffs)} are not decreasing")
    tableau = [values]
    for j in range(1, len(values)):
        factor = ratio ** j - 1.0
        prev = tableau[-1]
        tableau.append([prev[i + 1] + (prev[i + 1] - prev[i]) / factor for i in range(len(prev) - 1)])
    return tableau[-1][0], tableau


def circle_nodes(radius: float, points: int) -> np.ndarray:
    """points equally spaced offsets on the circle |eps| = radius"""
    if not radius > 0 or points < 2:
        raise ValueError(f"circle needs radius > 0 and at least two points, got {radius}, {points}")
    return radius * np.exp(2j * math.pi * (np.arange(points) + 0.5) / points)


def circle_mean(samples: Sequence[complex]) -> complex:
    """
    Centre value of a function analytic on and inside the sampling circle:
    the trapezoid mean of samples at circle_nodes. The error decays like
    (radius / distance to the nearest singularity)^points.
    """
    if len(samples) < 2:
        raise ValueError("circle mean needs at least two samples")
    return csum([complex(s) for s in samples]) / len(samples)
