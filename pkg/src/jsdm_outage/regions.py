"""Piecewise (r_m, r_s) association regions and integration over them.

For each LOS/NLOS pairing of the nearest macro and nearest pico link the
rectangle of distances splits into a macro-served region and a pico-served
region. :func:`region_spec` transcribes the closed-form piecewise bounds;
:func:`oracle_membership` tests the raw received-power inequality instead,
so the two can be checked against each other.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, RegionError
from .geometry import nearest_distance_pdf

log = logging.getLogger(__name__)


class Case(enum.IntEnum):
    """Pairing of (macro link, pico link) exponents; value is the index i."""

    LL = 1
    NL = 2
    LN = 3
    NN = 4

    @property
    def macro_los(self):
        return self in (Case.LL, Case.LN)

    @property
    def pico_los(self):
        return self in (Case.LL, Case.NL)


class Tier(enum.Enum):
    MACRO = "macro"
    PICO = "pico"


@dataclass(frozen=True)
class Bound:
    """``var <op> coef * other**power`` (``power == 0`` means a constant)."""

    var: str  # "m" or "s"
    upper: bool
    coef: float
    power: float = 0.0
    strict: bool = False

    def value(self, other):
        if self.power == 0:
            return np.full(np.shape(other), self.coef, dtype=float)
        return self.coef * np.asarray(other, dtype=float) ** self.power

    def holds(self, m, s):
        x, other = (m, s) if self.var == "m" else (s, m)
        v = self.value(other)
        if self.upper:
            return x < v if self.strict else x <= v
        return x > v if self.strict else x >= v


@dataclass(frozen=True)
class RegionSpec:
    case: Case
    tier: Tier
    branch: str
    pieces: tuple  # tuple of tuples of Bound

    @property
    def empty(self):
        return not self.pieces


def _lo(var, coef, power=0.0, strict=False):
    return Bound(var, False, coef, power, strict)


def _hi(var, coef, power=0.0, strict=False):
    return Bound(var, True, coef, power, strict)


def _params(cfg):
    rho = cfg.power_ratio
    return (rho, cfg.macro.alpha_los, cfg.macro.alpha_nlos, cfg.macro.los_radius,
            cfg.macro.disc_radius, cfg.pico.los_radius, cfg.pico.disc_radius)


def _check_exponents(cfg):
    if (cfg.macro.alpha_los, cfg.macro.alpha_nlos) != (cfg.pico.alpha_los, cfg.pico.alpha_nlos):
        raise ValueError("closed-form regions assume both tiers share alpha_L and alpha_N")


def _macro_region(case, cfg):
    rho, aL, aN, RL, R, rL, r = _params(cfg)
    if case is Case.LL:
        if rho ** (1 / aL) * RL <= rL:
            return "a", [(_lo("s", rho ** (1 / aL), 1), _hi("s", rL),
                          _lo("m", 0.0), _hi("m", RL))]
        return "b", [(_lo("s", 0.0), _hi("s", rL), _lo("m", 0.0),
                      _hi("m", rho ** (-1 / aL), 1))]
    if case is Case.NL:
        x = rho ** (1 / aL) * R ** (aN / aL)
        y = rho ** (1 / aL) * RL ** (aN / aL)
        thr = _lo("s", rho ** (1 / aL), aN / aL)
        if x <= rL:
            return "a", [(thr, _hi("s", rL), _lo("m", RL), _hi("m", R))]
        if y <= rL:
            return "b", [(thr, _hi("s", rL), _lo("m", RL),
                          _hi("m", rho ** (-1 / aN) * rL ** (aL / aN)))]
        return "empty", []
    if case is Case.LN:
        x = rho ** (1 / aN) * RL ** (aL / aN)
        knee = rho ** (-1 / aL) * rL ** (aN / aL)
        if x <= rL:
            return "a", [(_lo("s", rL), _hi("s", r), _lo("m", 0.0), _hi("m", RL))]
        if x <= r:
            return "b", [
                (_lo("s", rL), _hi("s", r), _lo("m", 0.0), _hi("m", knee)),
                (_lo("m", knee, strict=True), _hi("m", RL),
                 _lo("s", rho ** (1 / aN), aL / aN), _hi("s", r)),
            ]
        return "c", [(_lo("m", 0.0, strict=True), _hi("m", rho ** (-1 / aL), aN / aL),
                      _lo("s", rL), _hi("s", r))]
    # NN
    c = rho ** (1 / aN)
    xa, xb = c * RL, c * R
    if xa >= r:
        return "empty", []
    if xb <= rL:
        return "b", [(_lo("s", rL), _hi("s", r), _lo("m", RL), _hi("m", R))]
    thr = _lo("s", c, 1)
    if xa >= rL and xb <= r:
        return "c", [(thr, _hi("s", r), _lo("m", RL), _hi("m", R))]
    if xa >= rL:
        return "d", [(thr, _hi("s", r), _lo("m", RL), _hi("m", r / c))]
    if xb <= r:
        return "e", [(_lo("s", rL), _hi("s", r), _lo("m", RL), _hi("m", rL / c)),
                     (thr, _hi("s", r), _lo("m", rL / c), _hi("m", R))]
    return "f", [(_lo("s", rL), _hi("s", r), _lo("m", RL), _hi("m", 1 / c, 1))]


def _pico_region(case, cfg):
    rho, aL, aN, RL, R, rL, r = _params(cfg)
    if case is Case.LL:
        if rho ** (1 / aL) * RL <= rL:
            return "a", [(_lo("s", 0.0), _hi("s", rho ** (1 / aL), 1),
                          _lo("m", 0.0), _hi("m", RL))]
        return "b", [(_lo("s", 0.0), _hi("s", rL),
                      _lo("m", rho ** (-1 / aL), 1), _hi("m", RL))]
    if case is Case.NL:
        x = rho ** (1 / aL) * R ** (aN / aL)
        y = rho ** (1 / aL) * RL ** (aN / aL)
        knee = rho ** (-1 / aN) * rL ** (aL / aN)
        if x <= rL:
            return "a", [(_lo("s", 0.0), _hi("s", rho ** (1 / aL), aN / aL),
                          _lo("m", RL), _hi("m", R))]
        if y >= rL:
            return "b", [(_lo("s", 0.0), _hi("s", rL), _lo("m", RL), _hi("m", R))]
        return "c", [(_lo("s", 0.0), _hi("s", rL), _lo("m", knee), _hi("m", R)),
                     (_lo("m", RL), _hi("m", knee),
                      _lo("s", 0.0), _hi("s", rho ** (1 / aL), aN / aL))]
    if case is Case.LN:
        x = rho ** (1 / aN) * RL ** (aL / aN)
        knee = rho ** (-1 / aL) * rL ** (aN / aL)
        if x <= rL:
            return "empty", []
        # complement of macro branch "b": rL < x <= r
        if x <= r:
            return "b", [(_lo("m", knee, strict=True), _hi("m", RL),
                          _lo("s", rL), _hi("s", rho ** (1 / aN), aL / aN))]
        return "c", [(_lo("m", rho ** (-1 / aL), aN / aL, strict=True), _hi("m", RL),
                      _lo("s", rL), _hi("s", r))]
    c = rho ** (1 / aN)
    xa, xb = c * RL, c * R
    if xa >= r:
        return "a", [(_lo("s", rL), _hi("s", r), _lo("m", RL), _hi("m", R))]
    if xb <= rL:
        return "empty", []
    if xa >= rL and xb <= r:
        return "c", [(_lo("s", rL), _hi("s", c, 1), _lo("m", RL), _hi("m", R))]
    if xa >= rL:
        return "d", [(_lo("s", rL), _hi("s", r), _lo("m", r / c), _hi("m", R)),
                     (_lo("s", rL), _hi("s", c, 1), _lo("m", RL), _hi("m", r / c))]
    if xb <= r:
        return "e", [(_lo("s", rL), _hi("s", c, 1), _lo("m", rL / c), _hi("m", R))]
    return "f", [(_lo("s", rL), _hi("s", r), _lo("m", 1 / c, 1), _hi("m", R))]


def region_spec(case, tier, cfg):
    """Closed-form pieces of the macro- or pico-served region for ``case``."""
    _check_exponents(cfg)
    case, tier = Case(case), Tier(tier)
    fn = _macro_region if tier is Tier.MACRO else _pico_region
    branch, pieces = fn(case, cfg)
    log.debug("region %s/%s: branch %s", case.name, tier.value, branch)
    return RegionSpec(case, tier, branch, tuple(tuple(p) for p in pieces))


def case_rectangle(case, cfg):
    """((m_lo, m_hi), (s_lo, s_hi)) of the LOS/NLOS segment pairing."""
    case = Case(case)
    m = (0.0, cfg.macro.los_radius) if case.macro_los else (
        cfg.macro.los_radius, cfg.macro.disc_radius)
    s = (0.0, cfg.pico.los_radius) if case.pico_los else (
        cfg.pico.los_radius, cfg.pico.disc_radius)
    return m, s


def marginal_range(tier, los, cfg):
    """LOS ([0, los_radius]) or NLOS ([los_radius, radius]) distance range."""
    params = cfg.macro if Tier(tier) is Tier.MACRO else cfg.pico
    if los:
        return 0.0, params.los_radius
    return params.los_radius, params.disc_radius


def _validate_point(cfg, m, s):
    m = np.asarray(m, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any((m < 0) | (m > cfg.macro.disc_radius) | (s < 0) | (s > cfg.pico.disc_radius)):
        raise RegionError("point outside [0, R] x [0, r]")
    return m, s


def spec_membership(spec, m, s):
    m = np.asarray(m, dtype=float)
    s = np.asarray(s, dtype=float)
    out = np.zeros(np.broadcast(m, s).shape, bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        for piece in spec.pieces:
            ok = np.ones_like(out)
            for b in piece:
                ok &= b.holds(m, s)
            out |= ok
    return out


def region_membership(case, tier, cfg, r_m, r_s):
    """Membership of (r_m, r_s) in the closed-form region (vectorised)."""
    m, s = _validate_point(cfg, r_m, r_s)
    return spec_membership(region_spec(case, tier, cfg), m, s)


def oracle_membership(case, tier, cfg, r_m, r_s):
    """Membership from the rectangle bounds and the raw power comparison."""
    case, tier = Case(case), Tier(tier)
    m = np.asarray(r_m, dtype=float)
    s = np.asarray(r_s, dtype=float)
    (m_lo, m_hi), (s_lo, s_hi) = case_rectangle(case, cfg)
    inside = (m >= m_lo) & (m <= m_hi) & (s >= s_lo) & (s <= s_hi)
    am = cfg.macro.alpha_los if case.macro_los else cfg.macro.alpha_nlos
    a_s = cfg.pico.alpha_los if case.pico_los else cfg.pico.alpha_nlos
    k2 = cfg.kappa2
    with np.errstate(divide="ignore"):
        pico_rx = cfg.pico_power * k2 * s ** (-a_s)
        macro_rx = cfg.macro_power * k2 * m ** (-am)
    pico_wins = pico_rx >= macro_rx
    return inside & (pico_wins if tier is Tier.PICO else ~pico_wins)


def boundary_margin(case, cfg, r_m, r_s):
    """Scale-free distance of a point to the power-equality curve and to the
    rectangle edges; used to exclude boundary points from exact comparisons."""
    case = Case(case)
    m = np.asarray(r_m, dtype=float)
    s = np.asarray(r_s, dtype=float)
    am = cfg.macro.alpha_los if case.macro_los else cfg.macro.alpha_nlos
    a_s = cfg.pico.alpha_los if case.pico_los else cfg.pico.alpha_nlos
    with np.errstate(divide="ignore", invalid="ignore"):
        power_gap = np.abs(np.log(cfg.power_ratio) - a_s * np.log(s) + am * np.log(m))
    edges = [0.0, cfg.macro.los_radius, cfg.macro.disc_radius]
    sedges = [0.0, cfg.pico.los_radius, cfg.pico.disc_radius]
    gap_m = np.min([np.abs(m - e) for e in edges], axis=0) / cfg.macro.disc_radius
    gap_s = np.min([np.abs(s - e) for e in sedges], axis=0) / cfg.pico.disc_radius
    return np.minimum(np.nan_to_num(power_gap, nan=np.inf), np.minimum(gap_m, gap_s))


# -- integration ----------------------------------------------------------------

_INNER_NODES = 24


def _inner_interval(piece, outer_var, x, lo, hi, ref=None):
    """Interval of the inner variable allowed by one piece at outer values ``x``.

    Constant bounds on the outer variable are tested at ``ref`` when given,
    so a whole panel between knots sees the same set of pieces.
    """
    lo = np.full(x.shape, lo, dtype=float)
    hi = np.full(x.shape, hi, dtype=float)
    feasible = np.ones(x.shape, bool)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for b in piece:
            if b.var != outer_var:
                v = b.value(x)
                if b.upper:
                    hi = np.minimum(hi, v)
                else:
                    lo = np.maximum(lo, v)
            elif b.power == 0:
                at = x if ref is None else ref
                feasible &= (at <= b.coef) if b.upper else (at >= b.coef)
            else:
                # outer <op> coef * inner**power  ->  bound on the inner variable
                v = (x / b.coef) ** (1.0 / b.power)
                if b.upper:
                    lo = np.maximum(lo, v)
                else:
                    hi = np.minimum(hi, v)
    return lo, np.where(feasible, np.maximum(hi, lo), lo)


def _slice_integral(spec, outer_var, x, inner_rect, integrand, f_outer, f_inner,
                    ref=None):
    t, w = np.polynomial.legendre.leggauss(_INNER_NODES)
    total = np.zeros(x.shape)
    xo = x[:, None]
    for piece in spec.pieces:
        lo, hi = _inner_interval(piece, outer_var, x, *inner_rect, ref=ref)
        half = 0.5 * (hi - lo)
        if not np.any(half > 0):
            continue
        nodes = (0.5 * (hi + lo))[:, None] + half[:, None] * t[None, :]
        if outer_var == "m":
            vals = integrand(xo, nodes) * f_inner(nodes)
        else:
            vals = integrand(nodes, xo) * f_inner(nodes)
        vals = np.broadcast_to(vals, nodes.shape)
        total += half * (vals @ w)
    return total * f_outer(x)


def _inner_curves(piece, outer_var):
    """Inner-variable boundaries of one piece as (coef, power) in the outer variable."""
    curves = []
    for b in piece:
        if b.var != outer_var:
            curves.append((b.coef, b.power))
        elif b.power != 0 and b.coef > 0:
            curves.append((b.coef ** (-1.0 / b.power), 1.0 / b.power))
    return curves


def _breakpoints(spec, outer_var, a, b, inner_rect):
    """Outer-variable points where some slice bound changes its functional form."""
    pts = {a, b}
    lims = [(v, 0.0) for v in inner_rect]
    for piece in spec.pieces:
        for bd in piece:
            if bd.var == outer_var and bd.power == 0:
                pts.add(bd.coef)
        curves = _inner_curves(piece, outer_var) + lims
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            for i, (c1, p1) in enumerate(curves):
                for c2, p2 in curves[i + 1:]:
                    if p1 == p2 or c1 <= 0 or c2 <= 0:
                        continue
                    pts.add(float((c2 / c1) ** (1.0 / (p1 - p2))))
    return sorted(x for x in pts if np.isfinite(x) and a <= x <= b)


def _adaptive_simpson(g, a, b, rtol, atol, max_level, what):
    n = 16
    x = np.linspace(a, b, n + 1)
    y = g(x)
    prev_s = _simpson(y, b - a)
    prev_r = None
    for _ in range(max_level):
        xm = 0.5 * (x[1:] + x[:-1])
        ym = g(xm)
        xx = np.empty(2 * n + 1)
        yy = np.empty(2 * n + 1)
        xx[0::2], xx[1::2] = x, xm
        yy[0::2], yy[1::2] = y, ym
        x, y, n = xx, yy, 2 * n
        s = _simpson(y, b - a)
        rich = s + (s - prev_s) / 15.0
        if prev_r is not None and abs(rich - prev_r) <= rtol * abs(rich) + atol:
            return float(rich)
        prev_s, prev_r = s, rich
    raise ConvergenceError(f"{what} integral did not converge", estimates=(prev_r, rich))


def integrate_over_region(case, tier, cfg, integrand, rtol=1e-4, atol=1e-12,
                          max_level=13):
    """Integral of integrand(r_m, r_s) * f_m(r_m) * f_s(r_s) over one region.

    The serving tier's distance is the outer variable. Its range is split at
    the knots of the slice bounds and each smooth panel is integrated by
    composite Simpson with Richardson extrapolation, doubled until the
    relative change drops below ``rtol``; the other distance is integrated
    across each piece's slice by Gauss-Legendre. ``integrand`` receives
    broadcastable arrays.
    """
    spec = region_spec(case, tier, cfg)
    if spec.empty:
        return 0.0
    (m_lo, m_hi), (s_lo, s_hi) = case_rectangle(spec.case, cfg)
    fm = lambda d: nearest_distance_pdf(cfg.macro.density, d)  # noqa: E731
    fs = lambda d: nearest_distance_pdf(cfg.pico.density, d)  # noqa: E731
    if spec.tier is Tier.MACRO:
        outer_var, (a, b), inner_rect, f_out, f_in = "m", (m_lo, m_hi), (s_lo, s_hi), fm, fs
    else:
        outer_var, (a, b), inner_rect, f_out, f_in = "s", (s_lo, s_hi), (m_lo, m_hi), fs, fm
    if b <= a:
        return 0.0

    knots = _breakpoints(spec, outer_var, a, b, inner_rect)
    what = f"region {spec.case.name}/{spec.tier.value}"
    total = 0.0
    for lo, hi in zip(knots[:-1], knots[1:]):
        if hi - lo > 1e-12 * (b - a):
            def g(x, mid=0.5 * (lo + hi)):
                return _slice_integral(spec, outer_var, x, inner_rect, integrand, f_out,
                                       f_in, ref=mid)
            total += _adaptive_simpson(g, lo, hi, rtol, atol, max_level, what)
    return total


def _simpson(y, length):
    n = len(y) - 1
    h = length / n
    return h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())


def integrate_marginal(tier, los, cfg, integrand, rtol=1e-4, atol=1e-12, max_level=13):
    """Integral of integrand(d) * f(d) over an LOS or NLOS distance range."""
    tier = Tier(tier)
    params = cfg.macro if tier is Tier.MACRO else cfg.pico
    a, b = marginal_range(tier, los, cfg)
    if b <= a or params.density == 0:
        return 0.0

    def g(x):
        return np.broadcast_to(integrand(x), x.shape) * nearest_distance_pdf(params.density, x)

    return _adaptive_simpson(g, a, b, rtol, atol, max_level, f"{tier.value} marginal")


def region_masks(cfg, resolution):
    """0/1 masks of all eight regions on a resolution x resolution grid.

    Returns ``(r_m grid, r_s grid, {(case, tier): mask}, oracle_diff)``.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    m = np.linspace(0.0, cfg.macro.disc_radius, resolution)
    s = np.linspace(0.0, cfg.pico.disc_radius, resolution)
    mm, ss = np.meshgrid(m, s, indexing="ij")
    masks = {}
    diff = np.zeros(mm.shape, int)
    for case in Case:
        margin = boundary_margin(case, cfg, mm, ss)
        interior = margin > 1e-9
        for tier in Tier:
            mask = region_membership(case, tier, cfg, mm, ss)
            masks[(case, tier)] = mask.astype(int)
            ref = oracle_membership(case, tier, cfg, mm, ss)
            diff |= ((mask != ref) & interior).astype(int)
    return m, s, masks, diff
