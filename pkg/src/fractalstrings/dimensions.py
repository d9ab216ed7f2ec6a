"""Complex dimensions: certified root location and classification.

The root finder counts zeros of exponential Dirichlet polynomials inside
rectangles by trapezoid quadrature of f'/f along the boundary (argument
principle), subdividing 2x2 until each piece isolates winding <= 1 or
shrinks to the multiple-root floor.  Multiplicities come from the winding
of the isolating rectangle, never from Newton behavior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    ContourThroughRoot,
    MultiplePole,
    NonConvergence,
    NotNonlattice,
    PolynomialSolveFailure,
    UnknownConstant,
)
from .strings import DirichletPolynomial, SelfSimilarStringSpec
from .values import ExactReal


@dataclass(frozen=True)
class Window:
    sigma_min: float
    sigma_max: float
    t_min: float
    t_max: float

    def __post_init__(self):
        if not (self.sigma_min < self.sigma_max and self.t_min < self.t_max):
            raise ValueError("empty window")

    @property
    def width(self) -> float:
        return self.sigma_max - self.sigma_min

    @property
    def height(self) -> float:
        return self.t_max - self.t_min

    def corners(self):
        return (
            complex(self.sigma_min, self.t_min),
            complex(self.sigma_max, self.t_min),
            complex(self.sigma_max, self.t_max),
            complex(self.sigma_min, self.t_max),
        )

    def contains(self, s: complex, slack: float = 0.0) -> bool:
        return (
            self.sigma_min - slack <= s.real <= self.sigma_max + slack
            and self.t_min - slack <= s.imag <= self.t_max + slack
        )

    def mirrored(self) -> "Window":
        return Window(self.sigma_min, self.sigma_max, -self.t_max, -self.t_min)


@dataclass(frozen=True)
class ComplexDimension:
    """A root omega with certified multiplicity and (if simple) residue."""

    omega: complex
    multiplicity: int = 1
    residue: complex | None = None


@dataclass(frozen=True)
class DimensionWindow:
    """Root set of a window together with the argument-principle count."""

    sigma_min: float
    sigma_max: float
    t_min: float
    t_max: float
    roots: tuple[ComplexDimension, ...]
    winding_total: int

    @property
    def window(self) -> Window:
        return Window(self.sigma_min, self.sigma_max, self.t_min, self.t_max)


@dataclass(frozen=True)
class RootFinderConfig:
    start_nodes: int = 64
    max_nodes: int = 1 << 20
    stable_tol: float = 0.25
    min_size: float = 1e-8
    newton_tol: float = 1e-12
    perturb: float = 1e-6
    max_retries: int = 5
    strip_height: float = 8.0
    line_samples: int = 513
    extended_polish: bool = True
    # below this rectangle size, |f| near a multiple root sinks under the
    # double-precision cancellation noise; quadrature switches to mpmath
    mp_below: float = 1e-5
    mp_dps: int = 40


DEFAULT_CONFIG = RootFinderConfig()

_SPLIT_FRACTIONS = (0.5, 0.55, 0.45, 0.6, 0.4, 0.62, 0.38)


class _BoundarySignal(Exception):
    """Internal: a window side appears to pass through a root."""

    def __init__(self, side: int):
        self.side = side  # 0 bottom, 1 right, 2 top, 3 left


# -- winding quadrature ---------------------------------------------------


def _adaptive_winding(fn, dfn, window: Window, cfg: RootFinderConfig):
    """Winding number of fn around the window, or a _BoundarySignal.

    Trapezoid quadrature of f'/f per side; node count doubles until two
    consecutive estimates agree on the same integer within stable_tol.
    """
    corners = window.corners()
    m = cfg.start_nodes
    prev = None
    half_hits = 0
    while m <= cfg.max_nodes:
        total = 0.0 + 0.0j
        min_abs = math.inf
        min_side = 0
        for side in range(4):
            z0, z1 = corners[side], corners[(side + 1) % 4]
            nodes = z0 + (z1 - z0) * np.linspace(0.0, 1.0, m + 1)
            fv = fn(nodes)
            fa = np.abs(fv)
            k = int(np.argmin(fa))
            if fa[k] < min_abs:
                min_abs = float(fa[k])
                min_side = side
            if not np.all(np.isfinite(fv)) or fa[k] == 0.0:
                raise _BoundarySignal(side)
            g = dfn(nodes) / fv
            if not np.all(np.isfinite(g)):
                raise _BoundarySignal(side)
            step = (z1 - z0) / m
            total += step * (0.5 * g[0] + g[1:-1].sum() + 0.5 * g[-1])
        est = total / (2j * math.pi)
        nearest = round(est.real)
        dist = abs(est - nearest)
        if prev is not None and dist < cfg.stable_tol:
            prev_nearest, prev_dist = prev
            if prev_nearest == nearest and prev_dist < cfg.stable_tol:
                return int(nearest)
        # estimates pinned near a half-integer signal a boundary root
        if m >= 2048 and abs(est.real - nearest) > 0.38:
            half_hits += 1
            if half_hits >= 2:
                raise _BoundarySignal(min_side)
        prev = (nearest, dist)
        m *= 2
    raise _BoundarySignal(min_side)


def _winding_mp(poly: DirichletPolynomial, window: Window,
                cfg: RootFinderConfig) -> int:
    """Winding via extended-precision boundary evaluation.

    Used for tiny certification boxes around multiple roots, where the
    cancellation noise of double evaluation exceeds |f| itself."""
    import mpmath as mp

    corners = window.corners()
    m = cfg.start_nodes
    prev = None
    with mp.workdps(cfg.mp_dps):
        weights = poly._weights_mp()
        coeffs = poly.coeffs

        def pair(s):
            f = mp.mpc(poly.constant)
            d = mp.mpc(0)
            for w, c in zip(weights, coeffs):
                e = mp.e ** (-w * s)
                f -= c * e
                d += c * w * e
            return complex(f), complex(d)

        while m <= 8192:
            total = 0.0 + 0.0j
            for side in range(4):
                z0, z1 = corners[side], corners[(side + 1) % 4]
                ts = np.linspace(0.0, 1.0, m + 1)
                vals = np.empty(m + 1, dtype=complex)
                for i, t in enumerate(ts):
                    z = z0 + (z1 - z0) * t
                    f, d = pair(mp.mpc(z))
                    if f == 0:
                        raise _BoundarySignal(side)
                    vals[i] = d / f
                step = (z1 - z0) / m
                total += step * (0.5 * vals[0] + vals[1:-1].sum()
                                 + 0.5 * vals[-1])
            est = total / (2j * math.pi)
            nearest = round(est.real)
            dist = abs(est - nearest)
            if prev is not None and dist < cfg.stable_tol:
                if prev == nearest:
                    return int(nearest)
            prev = nearest
            m *= 2
    raise _BoundarySignal(0)


def _winding_auto(poly: DirichletPolynomial, window: Window,
                  cfg: RootFinderConfig) -> int:
    if max(window.width, window.height) < cfg.mp_below:
        return _winding_mp(poly, window, cfg)
    return _adaptive_winding(poly.eval, poly.deriv, window, cfg)


def _line_min_abs(fn, z0: complex, z1: complex, samples: int) -> float:
    nodes = z0 + (z1 - z0) * np.linspace(0.0, 1.0, samples)
    fv = np.abs(fn(nodes))
    fv = fv[np.isfinite(fv)]
    return float(fv.min()) if fv.size else 0.0


def _real_roots_on_segment(fn, a: float, b: float, samples: int = 2049):
    """Approximate real-axis roots of a real-on-reals function in [a, b]."""
    xs = np.linspace(a, b, samples)
    vals = np.real(fn(xs.astype(complex)))
    roots = []
    sign = np.sign(vals)
    for i in range(len(xs) - 1):
        if sign[i] == 0:
            roots.append(xs[i])
        elif sign[i] * sign[i + 1] < 0:
            lo, hi = xs[i], xs[i + 1]
            flo = vals[i]
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                fm = float(np.real(fn(complex(mid))))
                if flo * fm <= 0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            roots.append(0.5 * (lo + hi))
    return roots


# -- Newton refinement ----------------------------------------------------


def _refine_simple(poly: DirichletPolynomial, s0: complex, window: Window,
                   cfg: RootFinderConfig):
    s = s0
    diag = math.hypot(window.width, window.height)
    tol = cfg.newton_tol * max(1.0, poly.scale)
    for _ in range(80):
        d = poly.deriv(s)
        if d == 0:
            return None
        step = poly.eval(s) / d
        s = s - step
        if abs(s - s0) > 4.0 * diag + 1.0:
            return None
        if abs(step) < 1e-15 * (1.0 + abs(s)):
            break
    if cfg.extended_polish and abs(poly.eval(s)) < 1e-9 * max(1.0, poly.scale):
        s = poly.refine_newton_mp(s)
    if abs(poly.eval(s)) > tol:
        return None
    return s


def _refine_multiple(poly: DirichletPolynomial, s0: complex, mult: int,
                     cfg: RootFinderConfig):
    s = s0
    for _ in range(80):
        d = poly.deriv(s)
        if d == 0:
            break
        step = mult * poly.eval(s) / d
        s = s - step
        if abs(step) < 1e-14 * (1.0 + abs(s)):
            break
    if cfg.extended_polish:
        # double precision localizes an m-fold root only to ~eps^(1/m)
        s = poly.refine_newton_mp(s, mult=mult)
    return s


# -- subdivision ----------------------------------------------------------


def _ranked_splits(fn, window: Window, horizontal: bool,
                   cfg: RootFinderConfig):
    """Candidate split coordinates ordered by boundary clearance.

    Sampled min |f| along the line is a blunt filter (a double root between
    samples can hide), so callers must still re-try on winding trouble.
    """
    scored = []
    for frac in _SPLIT_FRACTIONS:
        if horizontal:
            coord = window.t_min + frac * window.height
            m = _line_min_abs(fn, complex(window.sigma_min, coord),
                              complex(window.sigma_max, coord),
                              cfg.line_samples)
        else:
            coord = window.sigma_min + frac * window.width
            m = _line_min_abs(fn, complex(coord, window.t_min),
                              complex(coord, window.t_max), cfg.line_samples)
        scored.append((m, coord))
    scored.sort(key=lambda mc: -mc[0])
    return [coord for _, coord in scored]


_PAIR_ORDER = ((0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2),
               (2, 2), (3, 3), (4, 4), (5, 5), (6, 6))


def _subdivide_counted(rect: Window, w: int, poly: DirichletPolynomial,
                       cfg: RootFinderConfig):
    """2x2 subdivision whose child windings provably add up to w.

    Split lines grazing a root make children unstable or inconsistent;
    ranked alternative fractions are tried until the count closes.
    """
    fn = poly.eval
    sig_cands = _ranked_splits(fn, rect, horizontal=False, cfg=cfg)
    t_cands = _ranked_splits(fn, rect, horizontal=True, cfg=cfg)
    for i, j in _PAIR_ORDER:
        if i >= len(sig_cands) or j >= len(t_cands):
            continue
        sig_mid, t_mid = sig_cands[i], t_cands[j]
        children = (
            Window(rect.sigma_min, sig_mid, rect.t_min, t_mid),
            Window(sig_mid, rect.sigma_max, rect.t_min, t_mid),
            Window(rect.sigma_min, sig_mid, t_mid, rect.t_max),
            Window(sig_mid, rect.sigma_max, t_mid, rect.t_max),
        )
        try:
            ws = [_winding_auto(poly, child, cfg) for child in children]
        except _BoundarySignal:
            continue
        if sum(ws) == w:
            return children, ws
    raise NonConvergence(
        "no subdivision of the rectangle yields consistent windings",
        rect=rect, winding=w,
    )


def _strip_boundaries(fn, window: Window, cfg: RootFinderConfig,
                      scale: float, n_strips: int):
    cuts = [window.t_min]
    for i in range(1, n_strips):
        t = window.t_min + window.height * i / n_strips
        step = window.height / n_strips
        best, best_min = t, -1.0
        for delta in (0.0, 0.07, -0.07, 0.13, -0.13, 0.23):
            cand = t + delta * step
            m = _line_min_abs(fn, complex(window.sigma_min, cand),
                              complex(window.sigma_max, cand),
                              cfg.line_samples)
            if m > 1e-7 * scale:
                best = cand
                break
            if m > best_min:
                best, best_min = cand, m
        cuts.append(best)
    cuts.append(window.t_max)
    return cuts


def find_polynomial_roots(poly: DirichletPolynomial, window: Window,
                          config: RootFinderConfig | None = None):
    """All roots of poly in the window, with certified multiplicities.

    Returns (roots, winding_total, contour) where roots is a list of
    (omega, multiplicity) sorted by (Re, Im) and contour is the possibly
    perturbed integration window.
    """
    cfg = config or DEFAULT_CONFIG
    scale = max(1.0, poly.scale)
    fn, dfn = poly.eval, poly.deriv

    current = window
    # roots sitting exactly on a horizontal side (e.g. D on t=0) are the
    # common case; detect via the real axis and pre-expand.
    for coord, side in ((current.t_min, 0), (current.t_max, 2)):
        if abs(coord) < 1e-12:
            reals = _real_roots_on_segment(fn, current.sigma_min,
                                           current.sigma_max)
            if reals:
                delta = cfg.perturb
                if side == 0:
                    current = replace(current, t_min=current.t_min - delta)
                else:
                    current = replace(current, t_max=current.t_max + delta)

    for attempt in range(cfg.max_retries + 1):
        try:
            roots, total = _search(poly, current, cfg, scale)
            return roots, total, current
        except _BoundarySignal as sig:
            delta = (attempt + 1) * cfg.perturb
            if sig.side == 0:
                t = current.t_min
                current = replace(current, t_min=t - delta * (1 + abs(t)))
            elif sig.side == 2:
                t = current.t_max
                current = replace(current, t_max=t + delta * (1 + abs(t)))
            elif sig.side == 1:
                current = replace(
                    current,
                    sigma_max=current.sigma_max
                    + delta * (1 + abs(current.t_max)),
                )
            else:
                current = replace(
                    current,
                    sigma_min=current.sigma_min
                    - delta * (1 + abs(current.t_max)),
                )
    raise ContourThroughRoot(
        "window boundary could not be moved off a root after retries",
        window=window,
    )


def _search(poly: DirichletPolynomial, window: Window,
            cfg: RootFinderConfig, scale: float):
    fn, dfn = poly.eval, poly.deriv

    strips = None
    base_n = max(1, math.ceil(window.height / cfg.strip_height))
    last_sig = None
    for extra in (0, 1, 2):
        cuts = _strip_boundaries(fn, window, cfg, scale, base_n + extra)
        try:
            strips = []
            for lo, hi in zip(cuts[:-1], cuts[1:]):
                strip = Window(window.sigma_min, window.sigma_max, lo, hi)
                strips.append((strip, _adaptive_winding(fn, dfn, strip, cfg)))
            break
        except _BoundarySignal as sig:
            strips, last_sig = None, sig
    if strips is None:
        raise last_sig

    total = sum(w for _, w in strips)
    queue = [(rect, w) for rect, w in strips if w > 0]
    found: list[tuple[complex, int]] = []
    while queue:
        rect, w = queue.pop()
        center = complex(0.5 * (rect.sigma_min + rect.sigma_max),
                         0.5 * (rect.t_min + rect.t_max))
        if w == 1:
            s = _refine_simple(poly, center, rect, cfg)
            if s is not None and rect.contains(s, slack=1e-7):
                found.append((s, 1))
                continue
        else:
            s = _try_collapse_cluster(poly, rect, w, cfg)
            if s is not None:
                found.append((s, w))
                continue
        if max(rect.width, rect.height) <= cfg.min_size:
            s = _refine_multiple(poly, center, w, cfg)
            found.append((s, w))
            continue
        children, child_w = _subdivide_counted(rect, w, poly, cfg)
        for child, cw in zip(children, child_w):
            if cw > 0:
                queue.append((child, cw))

    merged = _merge_roots(found, poly, cfg)
    if sum(m for _, m in merged) != total:
        raise NonConvergence(
            "winding total does not match located roots",
            total=total, located=merged,
        )
    merged.sort(key=lambda rm: (rm[0].real, rm[0].imag))
    return merged, total


def _try_collapse_cluster(poly: DirichletPolynomial, rect: Window, w: int,
                          cfg: RootFinderConfig):
    """Attempt to certify the whole winding-w content of rect as one
    w-fold root: refine by multiplicity-aware Newton, then confirm the
    winding of a shrinking pair of boxes around the prediction.

    Returns the root, or None to fall back to subdivision (e.g. when the
    cluster is really several separate roots)."""
    center = complex(0.5 * (rect.sigma_min + rect.sigma_max),
                     0.5 * (rect.t_min + rect.t_max))
    s = _refine_multiple(poly, center, w, cfg)
    if not (np.isfinite(s.real) and np.isfinite(s.imag)):
        return None
    if not rect.contains(s, slack=1e-7):
        return None
    for half in (1e-6, 0.5 * cfg.min_size):
        box = Window(s.real - half, s.real + half, s.imag - half,
                     s.imag + half)
        try:
            wb = _winding_auto(poly, box, cfg)
        except _BoundarySignal:
            return None
        if wb != w:
            return None
    return s


def _merge_roots(found, poly: DirichletPolynomial, cfg: RootFinderConfig):
    """Merge near-identical roots (a multiple root grazed by a split line
    shows up once per child); merged clusters are re-certified by the
    winding of a small enclosing box."""
    found = sorted(found, key=lambda rm: (rm[0].real, rm[0].imag))
    merged: list[list] = []
    for s, m in found:
        if merged and abs(s - merged[-1][0]) < 2.5e-8:
            merged[-1][1] += m
            merged[-1][2] = True
        else:
            merged.append([s, m, False])
    out = []
    for s, m, recheck in merged:
        if recheck:
            half = 1e-6
            box = Window(s.real - half, s.real + half,
                         s.imag - half, s.imag + half)
            try:
                w = _winding_auto(poly, box, cfg)
            except _BoundarySignal:
                w = m
            if w != m:
                raise NonConvergence(
                    "re-certification of a merged root cluster failed",
                    omega=s, merged=m, winding=w,
                )
            s = _refine_multiple(poly, s, m, cfg)
        out.append((s, m))
    return out


# -- spec-level operations ------------------------------------------------


def real_dimension(spec: SelfSimilarStringSpec) -> float:
    """Unique real root D of 1 = sum m_j r_j^s, bisection then Newton."""
    poly = spec.denominator()

    def f(x: float) -> float:
        return poly.eval(complex(x)).real

    lo, hi = 0.0, 1.0
    flo = f(lo)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if flo * fm <= 0:
            hi = mid
        else:
            lo, flo = mid, fm
    x = 0.5 * (lo + hi)
    for _ in range(40):
        d = poly.deriv(complex(x)).real
        step = f(x) / d
        x -= step
        if abs(step) < 1e-16:
            break
    return x


def residue_at(spec: SelfSimilarStringSpec, omega: complex) -> complex:
    """res(zeta; omega) = numerator(omega) / f'(omega) for simple poles."""
    d = spec.denominator().deriv(omega)
    if abs(d) < 1e-10:
        raise MultiplePole("denominator derivative vanishes", omega=omega)
    return spec.numerator_value(omega) / d


def contour_residue(fn, center: complex, radius: float = 1e-3,
                    nodes: int = 512) -> complex:
    """Residue of fn at center by trapezoid on a small circle.

    The trapezoid rule is spectrally accurate for the Laurent series, which
    is how multiple poles get their general explicit-formula terms.
    """
    theta = np.linspace(0.0, 2.0 * math.pi, nodes, endpoint=False)
    z = center + radius * np.exp(1j * theta)
    vals = fn(z) * (z - center)
    return complex(np.mean(vals))


def find_roots(spec: SelfSimilarStringSpec, window: Window,
               config: RootFinderConfig | None = None) -> DimensionWindow:
    """All denominator roots in the window with multiplicities and residues.

    Residues are attached to simple roots whose numerator does not vanish
    (otherwise the root is not a pole of zeta and residue is None).
    """
    poly = spec.denominator()
    pairs, total, contour = find_polynomial_roots(poly, window, config)
    roots = []
    for s, m in pairs:
        res = None
        if m == 1:
            num = spec.numerator_value(s)
            if abs(num) > 1e-9 * max(1.0, abs(spec.numerator_value(0.0))):
                res = residue_at(spec, s)
        roots.append(ComplexDimension(s, m, res))
    return DimensionWindow(contour.sigma_min, contour.sigma_max,
                           contour.t_min, contour.t_max,
                           tuple(roots), total)


def cancellation_reduce(spec: SelfSimilarStringSpec, window: Window,
                        config: RootFinderConfig | None = None,
                        coincidence_tol: float = 1e-9) -> DimensionWindow:
    """Pole set of zeta itself: denominator roots minus numerator zeros.

    Verified independently by the winding of zeta'/zeta over the window.
    """
    cfg = config or DEFAULT_CONFIG
    den = spec.denominator()
    den_pairs, den_total, contour = find_polynomial_roots(den, window, cfg)

    gap_poly = spec.gap_polynomial()
    if len(gap_poly.weights) <= 1:
        num_pairs, num_total = [], 0
    else:
        num_pairs, num_total, contour2 = find_polynomial_roots(
            gap_poly, contour, cfg)
        contour = contour2

    poles = []
    for s, m in den_pairs:
        cancel = sum(nm for ns, nm in num_pairs
                     if abs(ns - s) <= coincidence_tol)
        net = m - cancel
        if net > 0:
            if m == 1:
                res = residue_at(spec, s)
            elif net == 1:
                res = contour_residue(
                    lambda z: spec.numerator_value(z) / den.eval(z), s)
            else:
                res = None
            poles.append(ComplexDimension(s, net, res))

    # independent check: contour winding of zeta'/zeta = zeros - poles
    logL = math.log(float(spec.total_length))

    def zfn(z):
        return spec.numerator_value(z) / den.eval(z)

    def zdfn(z):
        q = gap_poly
        num = np.exp(np.asarray(z, dtype=complex) * logL) * (
            logL * q.eval(z) + q.deriv(z))
        f = den.eval(z)
        n = spec.numerator_value(z)
        return (num * f - n * den.deriv(z)) / f**2

    try:
        w_zeta = _adaptive_winding(zfn, zdfn, contour, cfg)
    except _BoundarySignal as sig:
        raise NonConvergence(
            "zeta winding verification hit the boundary", window=window
        ) from sig
    expected = num_total - den_total
    if w_zeta != expected:
        raise NonConvergence(
            "zeta'/zeta winding disagrees with net root count",
            winding=w_zeta, expected=expected,
        )

    poles.sort(key=lambda r: (r.omega.real, r.omega.imag))
    return DimensionWindow(contour.sigma_min, contour.sigma_max,
                           contour.t_min, contour.t_max,
                           tuple(poles), sum(r.multiplicity for r in poles))


# -- lattice / nonlattice classification ----------------------------------


@dataclass(frozen=True)
class Lattice:
    """Ratios are integer powers of one base r; dimensions are periodic."""

    r: float
    exponents: tuple[tuple[int, int], ...]  # (k_j, multiplicity), k_j increasing
    oscillatory_period: float
    q_max: int
    tol: float
    base_exact: ExactReal | None = None

    @property
    def kind(self) -> str:
        return "lattice"

    @property
    def degree(self) -> int:
        return max(k for k, _ in self.exponents)


@dataclass(frozen=True)
class Nonlattice:
    """Weights span a rank-v group; generic when v equals #distinct ratios."""

    rank: int
    generic: bool
    q_max: int
    tol: float

    @property
    def kind(self) -> str:
        return "nonlattice"


def _distinct_weights(spec: SelfSimilarStringSpec):
    """(weight, multiplicity) per distinct ratio, increasing weight."""
    return [(r.neg_log(), m) for r, m in spec.ratios][::-1]


def classify_lattice(spec: SelfSimilarStringSpec, q_max: int = 512,
                     tol: float = 1e-9):
    """Decide lattice vs nonlattice relative to the (q_max, tol) search.

    Exact detection is undecidable in floating point; the result records
    the bound it was certified against.
    """
    if spec.declared_base is not None:
        base = spec.declared_base
        exps = spec.declared_exponents
        g = math.gcd(*[k for k, _ in exps])
        exps = tuple((k // g, m) for k, m in exps)
        w_base = base.neg_log() * g
        return Lattice(math.exp(-w_base), exps, 2.0 * math.pi / w_base,
                       q_max, tol, base_exact=base)

    weights = _distinct_weights(spec)
    w1 = weights[0][0]
    ratios = [w / w1 for w, _ in weights]
    for q in range(1, q_max + 1):
        ks = [round(q * rho) for rho in ratios]
        if any(k < 1 for k in ks):
            continue
        if all(abs(rho - k / q) <= tol for rho, k in zip(ratios, ks)):
            g = math.gcd(*ks)
            ks = [k // g for k in ks]
            w_base = w1 * g / q
            exps = sorted(zip(ks, (m for _, m in weights)))
            merged: dict[int, int] = {}
            for k, m in exps:
                merged[k] = merged.get(k, 0) + m
            return Lattice(math.exp(-w_base), tuple(sorted(merged.items())),
                           2.0 * math.pi / w_base, q_max, tol)

    # nonlattice: bounded integer-relation search for the rank
    ws = np.array([w for w, _ in weights])
    M = len(ws)
    bound = max(2, int(round((2e6) ** (1.0 / M) / 2)))
    bound = min(bound, q_max)
    relations = []
    grids = np.meshgrid(*[np.arange(-bound, bound + 1)] * M, indexing="ij")
    coeffs = np.stack([g.ravel() for g in grids], axis=1)
    nonzero = np.any(coeffs != 0, axis=1)
    coeffs = coeffs[nonzero]
    lhs = np.abs(coeffs @ ws)
    scale = np.abs(coeffs) @ ws
    hits = coeffs[lhs <= tol * scale]
    if hits.size:
        rank_rel = np.linalg.matrix_rank(hits.astype(float))
    else:
        rank_rel = 0
    v = M - rank_rel
    return Nonlattice(rank=v, generic=(v == M), q_max=q_max, tol=tol)


def lattice_dirichlet(structure: Lattice) -> DirichletPolynomial:
    """1 - sum m_j r^(k_j s') written as a Dirichlet polynomial in s."""
    w_base = -math.log(structure.r)
    return DirichletPolynomial.from_terms(
        1.0, [(k * w_base, float(m), None) for k, m in structure.exponents]
    )


@dataclass(frozen=True)
class LatticeLines:
    """One representative root per vertical line, D-line first."""

    representatives: tuple[ComplexDimension, ...]
    period: float


def lattice_lines(structure: Lattice, spec: SelfSimilarStringSpec | None = None,
                  residual_tol: float = 1e-9) -> LatticeLines:
    """Solve sum m_j z^(k_j) = 1 and map each root to omega = log z / log r.

    Im(omega) is reduced to [0, p); the degree-k_N polynomial is solved by
    companion-matrix eigenvalues with a winding-finder fallback when the
    residual check fails.
    """
    degree = structure.degree
    coeffs = np.zeros(degree + 1)
    coeffs[degree] = -1.0  # constant term, low-order last below
    for k, m in structure.exponents:
        coeffs[degree - k] += m
    zroots = np.roots(coeffs)

    def poly_val(z):
        return np.polyval(coeffs, z)

    # cluster eigenvalues into multiple roots, then polish
    order = np.lexsort((zroots.imag, zroots.real))
    zroots = zroots[order]
    clusters: list[list[complex]] = []
    for z in zroots:
        if clusters and abs(z - clusters[-1][0]) < 1e-6:
            clusters[-1].append(z)
        else:
            clusters.append([z])

    dcoeffs = np.polyder(coeffs)
    reps: list[tuple[complex, int]] = []
    max_resid = 0.0
    for cluster in clusters:
        mult = len(cluster)
        z = complex(np.mean(cluster))
        for _ in range(60):
            d = np.polyval(dcoeffs, z)
            if d == 0:
                break
            step = mult * poly_val(z) / d
            z -= step
            if abs(step) < 1e-15 * (1 + abs(z)):
                break
        resid = abs(poly_val(z)) if mult == 1 else abs(
            np.polyval(np.polyder(coeffs, mult - 1), z))
        max_resid = max(max_resid, abs(poly_val(z)))
        reps.append((z, mult))

    scale = float(np.abs(coeffs).sum())
    if max_resid > residual_tol * scale:
        reps = _lattice_lines_fallback(structure, residual_tol)
        if reps is None:
            raise PolynomialSolveFailure(
                "companion eigensolve residual too large and fallback failed",
                residual=max_resid,
            )

    w_base = -math.log(structure.r)
    period = 2.0 * math.pi / w_base
    out = []
    for z, mult in reps:
        if z == 0:
            continue
        omega = -(math.log(abs(z)) + 1j * np.angle(z)) / w_base
        im = omega.imag % period
        out.append(ComplexDimension(complex(omega.real, im), mult))
    d_rep = max(out, key=lambda r: (round(r.omega.imag, 9) == 0.0,
                                    r.omega.real))
    rest = sorted((r for r in out if r is not d_rep),
                  key=lambda r: (-r.omega.real, r.omega.imag))
    return LatticeLines((d_rep, *rest), period)


def _lattice_lines_fallback(structure: Lattice, tol: float):
    """Winding-finder route over one period in omega space."""
    poly = lattice_dirichlet(structure)
    w_base = -math.log(structure.r)
    period = 2.0 * math.pi / w_base
    # all z-roots satisfy |z| <= 2 => Re omega >= -log 2 / w_base; widen a bit
    sigma_lo = -math.log(2.0 + structure.degree) / w_base - 1.0
    sigma_hi = 1.5
    try:
        pairs, _, _ = find_polynomial_roots(
            poly, Window(sigma_lo, sigma_hi, -1e-6, period - 1e-6))
    except (NonConvergence, ContourThroughRoot):
        return None
    return [(complex(math.exp(-w_base * s.real) * math.cos(-w_base * s.imag),
                     math.exp(-w_base * s.real) * math.sin(-w_base * s.imag)),
             m) for s, m in pairs]


def real_parts_density(roots) -> list[tuple[float, int]]:
    """Sorted real parts with cumulative counts: the staircase of Fig-style
    density diagrams.  Multiplicities repeat their real part."""
    xs: list[float] = []
    for r in roots:
        if isinstance(r, ComplexDimension):
            xs.extend([r.omega.real] * r.multiplicity)
        else:
            xs.append(complex(r).real)
    xs.sort()
    return [(x, i + 1) for i, x in enumerate(xs)]


# -- strip bounds and dimension-free regions -------------------------------


def left_bound(spec: SelfSimilarStringSpec) -> float:
    """Analytic left edge: any root satisfies m r_N^s <= 1 + sum_{j<=N-m} r_j^s,
    so the equality point bounds Re omega from below."""
    rs = spec.ratio_floats()
    r_small = rs[-1]
    m = sum(1 for r in rs if r == r_small)
    others = rs[: len(rs) - m]

    def h(sigma: float) -> float:
        return m * r_small**sigma - sum(r**sigma for r in others) - 1.0

    hi = 0.0
    while h(hi) > 0:
        hi += 1.0
    lo = hi - 1.0
    while h(lo) < 0:
        lo -= 1.0
        if lo < -200:
            return lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if h(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class SigmaL:
    value: float
    empirical: bool
    window_height: float | None = None


def sigma_l(spec: SelfSimilarStringSpec, t_max: float = 2000.0,
            config: RootFinderConfig | None = None,
            q_max: int = 512, tol: float = 1e-9) -> SigmaL:
    """Left edge of the dimension strip.

    Generic nonlattice: the unique real solution of
    1 + r_1^s + ... + r_{N-m}^s = m r_N^s.  Otherwise the empirical
    infimum of Re over roots with Im <= t_max, flagged as such.
    """
    structure = classify_lattice(spec, q_max, tol)
    if isinstance(structure, Lattice):
        raise NotNonlattice("sigma_l is defined for nonlattice strings only")
    if structure.generic:
        return SigmaL(left_bound(spec), empirical=False)
    window = default_window(spec, t_max)
    result = find_roots(spec, window, config)
    value = min(r.omega.real for r in result.roots)
    return SigmaL(value, empirical=True, window_height=t_max)


def default_window(spec: SelfSimilarStringSpec, t_max: float,
                   t_min: float = 0.0, margin: float = 0.1) -> Window:
    """Window guaranteed to span the full dimension strip up to t_max."""
    return Window(left_bound(spec) - margin, real_dimension(spec) + margin,
                  t_min, t_max)


def dimension_free_region(spec: SelfSimilarStringSpec, t: float,
                          cf_constant: float | None = None,
                          q_max: int = 10**4,
                          c_hat: float | None = None) -> float:
    """sigma bound of the pole-free region at height t.

    N = 2: D - C_b * C_cf^2 / t^2 with C_b = pi^4 (r1 r2)^D / (2 f'(D)^3).
    N > 2: D - c_hat * t^(-2/(N-1)) with the empirically fitted constant.
    """
    structure = classify_lattice(spec)
    if isinstance(structure, Lattice):
        raise NotNonlattice("dimension-free regions target nonlattice strings")
    D = real_dimension(spec)
    N = spec.N
    if N == 2:
        from .diophantine import badly_approximable_constant

        rs = spec.ratio_floats()
        w1, w2 = -math.log(rs[0]), -math.log(rs[1])
        alpha = w2 / w1
        c_cf = cf_constant if cf_constant is not None else (
            badly_approximable_constant(alpha, q_max))
        fprime = spec.denominator().deriv(complex(D)).real
        c_b = math.pi**4 * (rs[0] * rs[1]) ** D / (2.0 * fprime**3)
        return D - c_b * c_cf**2 / t**2
    if c_hat is None:
        raise UnknownConstant(
            "N > 2 region needs the empirically fitted constant; "
            "run fit_dimension_free_constant first"
        )
    return D - c_hat * t ** (-2.0 / (N - 1))


def fit_dimension_free_constant(spec: SelfSimilarStringSpec,
                                roots) -> float:
    """1st percentile of (D - Re w) * (Im w)^(2/(N-1)) over Im in [10, 1000]."""
    D = real_dimension(spec)
    N = spec.N
    vals = []
    for r in roots:
        omega = r.omega if isinstance(r, ComplexDimension) else complex(r)
        if 10.0 <= omega.imag <= 1000.0:
            vals.append(max(0.0, D - omega.real) * omega.imag ** (2.0 / (N - 1)))
    if not vals:
        raise UnknownConstant("no roots with Im in [10, 1000] supplied")
    return float(np.percentile(vals, 1.0))
