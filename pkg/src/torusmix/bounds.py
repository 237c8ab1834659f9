"""Energies, slice lengths, the lower-bound constants, and verdicts.

Notation used throughout: ``kappa`` is the mixing constant, ``kappa_prime``
the lower bound on |det grad Phi|, ``m_prime`` the separator length per unit
radius, ``m = min(m_prime, 2 - sqrt 2)`` and

    C = (1/24) * (kappa_prime * m / (8 pi))**2,

so that a map mixing at scale eps must have energy at least C / eps**2.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError
from .flow import (SQRT6, FlowMap, FlowSpec, _identity_grads, advance,
                   check_near_incompressible, det_floor, frobenius, piece_gradient)
from .geometry import (ScalarField, TorusPoint, cell_centers, integrate,
                       torus_dist_array)
from .maps import jacobian
from .mixing import (MixingParams, build_image_indicator, geometric_eps_grid,
                     mixes_at_scale, mixing_scale_scan)

TWO_MINUS_SQRT2 = 2.0 - math.sqrt(2.0)
SEPARATOR_AREA_TOL = 1e-10
ENERGY_RTOL = 1e-9


def as_map(subject):
    """Maps pass through; a FlowSpec becomes its time-1 map."""
    if isinstance(subject, FlowSpec):
        return FlowMap(subject)
    return subject


def _density(jac):
    d11, d12, d21, d22 = jac
    return 0.5 * (d11 * d11 + d12 * d12 + d21 * d21 + d22 * d22)


def energy_density(m, p: TorusPoint) -> float:
    """Half the squared Frobenius norm of the Jacobian at p."""
    return float(_density(jacobian(as_map(m), p).as_tuple()))


def energy_density_field(m, grid_res) -> ScalarField:
    c1, c2 = cell_centers(grid_res, grid_res)
    jac = as_map(m).jacobian_arrays(c1, c2)
    return ScalarField(_density(jac))


def det_field(m, grid_res) -> ScalarField:
    c1, c2 = cell_centers(grid_res, grid_res)
    d11, d12, d21, d22 = as_map(m).jacobian_arrays(c1, c2)
    return ScalarField(d11 * d22 - d12 * d21)


def total_energy(m, grid_res=512) -> float:
    if grid_res < 64:
        raise DomainError(f"grid_res must be >= 64, got {grid_res}")
    return integrate(energy_density_field(m, grid_res))


def _mean(values):
    return math.fsum(np.ravel(values).tolist()) / np.size(values)


def slice_profile(m, s, quad_points=1024):
    """Speed |d Phi / d x1| along the image of the circle x2 = s."""
    if not (0.0 <= s < 1.0):
        raise DomainError(f"slice height must lie in [0, 1), got {s}")
    if quad_points < 128:
        raise DomainError(f"quad_points must be >= 128, got {quad_points}")
    x1 = (np.arange(quad_points) + 0.5) / quad_points
    x2 = np.full(quad_points, float(s))
    d11, _, d21, _ = as_map(m).jacobian_arrays(x1, x2)
    return np.sqrt(d11 * d11 + d21 * d21)


def slice_length(m, s, quad_points=1024) -> float:
    """Length of the image of the horizontal circle x2 = s (midpoint rule)."""
    return _mean(slice_profile(m, s, quad_points))


def slice_stats(m, s, quad_points=1024):
    """(length, integral of squared speed, Hoelder residual).

    The residual int v^2 - (int v)^2 is evaluated in the algebraically equal
    form int (v - mean v)^2: never negative, and exactly zero for constant speed.
    """
    v = slice_profile(m, s, quad_points)
    length = _mean(v)
    return length, _mean(v * v), _mean((v - length) ** 2)


# ---------------------------------------------------------------------------
# separator constant

def _segment(theta):
    """theta - sin(theta) cos(theta), with a series near 0 to avoid cancellation."""
    if theta < 1e-3:
        t2 = theta * theta
        return theta * t2 * (2.0 / 3.0 - t2 * (2.0 / 15.0 - t2 * 4.0 / 315.0))
    return theta - math.sin(theta) * math.cos(theta)


def lens_area(alpha):
    """Area cut from the unit disk by the orthogonal arc of radius tan(alpha).

    alpha is the half-angle of the chord seen from the disk center; the arc's
    own half-angle is pi/2 - alpha, so its circle is centered at distance
    sqrt(1 + r^2) and meets the unit circle at right angles.
    """
    beta = 0.5 * math.pi - alpha
    r = math.tan(alpha)
    return _segment(alpha) + r * r * _segment(beta)


def orthogonal_arc_length(alpha):
    return 2.0 * (0.5 * math.pi - alpha) * math.tan(alpha)


def min_separator_length(kappa) -> float:
    """Length of the shortest curve splitting the unit disk into area fractions kappa, 1 - kappa.

    Solved by bisection on the orthogonal-arc lens area, which increases
    monotonically with the arc radius. At kappa = 1/2 the arc degenerates to
    the diameter and the limit value 2 is returned.
    """
    if not (0.0 < kappa <= 0.5):
        raise DomainError(f"kappa must lie in (0, 1/2], got {kappa}")
    if kappa == 0.5:
        return 2.0
    target = kappa * math.pi
    lo, hi = 0.0, 0.5 * math.pi
    while True:
        mid = 0.5 * (lo + hi)
        a = lens_area(mid)
        if abs(a - target) <= SEPARATOR_AREA_TOL * target or hi - lo < 1e-15:
            return orthogonal_arc_length(mid)
        if a < target:
            lo = mid
        else:
            hi = mid


@dataclass(frozen=True)
class BoundConstants:
    kappa: float
    kappa_prime: float
    m_prime: float
    m: float
    C: float

    def as_dict(self):
        return asdict(self)


def bound_constant(kappa, kappa_prime) -> BoundConstants:
    if not (0.0 < kappa < 0.5):
        raise DomainError(f"kappa must lie in (0, 1/2), got {kappa}")
    if not (0.0 < kappa_prime <= 1.0):
        raise DomainError(f"kappa_prime must lie in (0, 1], got {kappa_prime}")
    m_prime = min_separator_length(kappa)
    m = min(m_prime, TWO_MINUS_SQRT2)
    c = (kappa_prime * m / (8.0 * math.pi)) ** 2 / 24.0
    return BoundConstants(kappa, kappa_prime, m_prime, m, c)


def half_energy_bound(kappa_prime, m, eps):
    """Lower bound for the energy carried by A alone: (1/48)(kappa' m / (8 pi eps))^2."""
    return (kappa_prime * m / (8.0 * math.pi * eps)) ** 2 / 48.0


# ---------------------------------------------------------------------------
# verdicts

def subject_membership(subject):
    mp = as_map(subject)

    def member(x1, x2):
        _, y2 = mp.backward(x1, x2)
        return y2 < 0.5

    return member


def image_indicator(subject, grid_res):
    return build_image_indicator(subject_membership(subject), grid_res)


def describe(subject):
    d = getattr(subject, "describe", None)
    return d() if d else repr(subject)


def theorem_verdict(subject, kappa, kappa_prime, grid_res=1024, eps_grid=None,
                    energy_res=512, indicator=None, scan=None):
    """Check E >= C / eps*^2 for the certified mixing scale eps*.

    Status is one of ``holds``, ``violated``, ``vacuous`` (no certified scale)
    or ``hypotheses unmet`` (sampled |det| dips below kappa_prime).
    """
    consts = bound_constant(kappa, kappa_prime)
    mp = as_map(subject)
    jac = mp.jacobian_arrays(*cell_centers(energy_res, energy_res))
    det = jac[0] * jac[3] - jac[1] * jac[2]
    det_min = float(np.abs(det).min())
    det_max = float(np.abs(det).max())
    floor = det_floor(kappa_prime, float(sum(a * a for a in jac).max()))
    report = {
        "subject": describe(subject),
        "kappa": kappa,
        "kappa_prime": kappa_prime,
        "constants": consts.as_dict(),
        "det_abs_min": det_min,
        "det_abs_max": det_max,
        "orientation_reversing": bool(getattr(mp, "orientation_reversing", False)),
    }
    report["det_floor"] = floor
    if det_min < floor:
        report.update(status="hypotheses unmet", holds=True, certified_eps=None)
        return report
    if scan is None:
        if indicator is None:
            indicator = image_indicator(subject, grid_res)
        scan = mixing_scale_scan(indicator, kappa, eps_grid or geometric_eps_grid())
    energy = integrate(ScalarField(_density(jac)))
    report.update(energy=energy, scan=scan.as_dict(), certified_eps=scan.certified)
    if scan.certified is None:
        report.update(status="vacuous", holds=True, bound=None, margin=None)
        return report
    bound = consts.C / scan.certified ** 2
    margin = energy - bound
    holds = margin >= -ENERGY_RTOL * max(1.0, energy)
    report.update(bound=bound, margin=margin, ratio=energy / bound,
                  status="holds" if holds else "violated", holds=bool(holds))
    return report


def _time_nodes(t_samples):
    if t_samples < 1:
        raise DomainError(f"t_samples must be >= 1, got {t_samples}")
    t = np.linspace(0.0, 1.0, t_samples + 1)
    w = np.full(t_samples + 1, 1.0 / t_samples)
    w[0] = w[-1] = 0.5 / t_samples
    return t, w


def _node_pieces(field, t):
    """Steady pieces seen at time node t: the one-sided limits inside [0, 1]."""
    sides = []
    if t > 0.0:
        sides.append(field.piece(math.nextafter(t, -math.inf)))
    if t < 1.0:
        sides.append(field.piece(t))
    return sides if len(sides) == 1 or sides[0] != sides[1] else sides[:1]


def _grid_mean(pieces, grid_res, fn):
    c1, c2 = cell_centers(grid_res, grid_res)
    out = []
    for kind, p0, p1 in pieces:
        with np.errstate(over="ignore"):
            vals = fn(frobenius(piece_gradient(kind, p0, p1, c1, c2)))
        if not np.all(np.isfinite(vals)):
            return math.inf
        out.append(_mean(vals))
    return math.fsum(out) / len(out)


def _spacetime_mean(spec, grid_res, t_samples, fn):
    """Space-time integral of fn(|grad F(t, x)|): midpoint in space, trapezoid in time.

    The fields are piecewise steady, so a time node on a switch takes the
    average of its one-sided limits. The |grad F| of the zoo fields has kinks
    on cell edges, which caps the midpoint rule at O(h^2) with an even error
    expansion; one Richardson step over the grid_res/2 and grid_res grids
    removes the h^2 term.
    """
    if grid_res < 32 or grid_res % 2:
        raise DomainError(f"grid_res must be even and >= 32, got {grid_res}")
    t, w = _time_nodes(t_samples)
    total = []
    for tj, wj in zip(t, w):
        pieces = _node_pieces(spec.field, float(tj))
        fine = _grid_mean(pieces, grid_res, fn)
        coarse = _grid_mean(pieces, grid_res // 2, fn)
        if math.isinf(fine) or math.isinf(coarse):
            return math.inf
        total.append(wj * (4.0 * fine - coarse) / 3.0)
    return math.fsum(total)


def corollary_rhs(spec: FlowSpec, grid_res=256, t_samples=64) -> float:
    """Integral over space-time of exp(sqrt6 |grad F|); +inf on overflow."""
    return _spacetime_mean(spec, grid_res, t_samples, lambda n: np.exp(SQRT6 * n))


def conjecture_diagnostic(spec: FlowSpec, grid_res=256, t_samples=64) -> float:
    """Integral over space-time of |grad F| (reported next to |log eps*|, never judged)."""
    return _spacetime_mean(spec, grid_res, t_samples, lambda n: n)


def chain_quantities(spec: FlowSpec, grid_res=128):
    """Terms of the Groenwall/Jensen chain, integrated along trajectories from a grid.

    Returns (int e(Phi_1), int int exp(sqrt6 |grad F(t, Phi_t)|),
    int int exp(...) / |det grad Phi_t|), time integrals by the per-step
    trapezoid rule.
    """
    c1, c2 = cell_centers(grid_res, grid_res)
    x1, x2 = c1.ravel().copy(), c2.ravel().copy()
    g = _identity_grads(x1.size)
    table = spec.step_table()
    kinds, p0, p1 = table
    h = spec.h
    acc_exp = np.zeros(x1.size)
    acc_det = np.zeros(x1.size)

    def terms(piece):
        norm = frobenius(piece_gradient(*piece, x1, x2))
        ex = np.exp(SQRT6 * norm)
        det = np.abs(g[:, 0] * g[:, 3] - g[:, 1] * g[:, 2])
        return ex, ex / det

    for n in range(spec.steps):
        piece = (int(kinds[n]), p0[n], p1[n])
        a0, b0 = terms(piece)
        advance(spec, x1, x2, g, n, n + 1, table=table)
        a1, b1 = terms(piece)
        acc_exp += 0.5 * h * (a0 + a1)
        acc_det += 0.5 * h * (b0 + b1)
    e1 = _density((g[:, 0], g[:, 1], g[:, 2], g[:, 3]))
    return _mean(e1), _mean(acc_exp), _mean(acc_det)


def corollary_verdict(spec: FlowSpec, kappa, kappa_prime, grid_res=512, eps_grid=None,
                      t_samples=64, chain_res=128, incompress_res=32, indicator=None,
                      scan=None):
    """Check C / eps*^2 <= int int exp(sqrt6 |grad F|) and report every link of the chain."""
    consts = bound_constant(kappa, kappa_prime)
    det_lo, det_hi, f2 = check_near_incompressible(spec, incompress_res, 10, with_scale=True)
    floor = det_floor(kappa_prime, f2)
    rhs = corollary_rhs(spec, min(grid_res, 256), t_samples)
    q1, q2, q3 = chain_quantities(spec, chain_res)
    q4 = rhs / kappa_prime
    report = {
        "subject": spec.describe(),
        "kappa": kappa,
        "kappa_prime": kappa_prime,
        "constants": consts.as_dict(),
        "det_abs_min": det_lo,
        "det_abs_max": det_hi,
        "det_floor": floor,
        "rhs": rhs,
        "chain": {
            "energy_time1": q1,
            "exp_along_trajectories": q2,
            "exp_over_det": q3,
            "rhs_over_kappa_prime": q4,
            "margin_groenwall_jensen": q2 - q1,
            "margin_det_insertion": q3 - q2,
            "margin_change_of_variables": q4 - q3,
            "det_insertion_flagged": bool(q3 - q2 < -1e-9 * max(1.0, q2)),
        },
    }
    if det_lo < floor:
        report.update(status="hypotheses unmet", holds=True, certified_eps=None)
        return report
    if scan is None:
        if indicator is None:
            indicator = image_indicator(spec, grid_res)
        scan = mixing_scale_scan(indicator, kappa, eps_grid or geometric_eps_grid())
    report.update(scan=scan.as_dict(), certified_eps=scan.certified)
    if scan.certified is None:
        report.update(status="vacuous", holds=True, bound=None, margin=None)
        return report
    bound = consts.C / scan.certified ** 2
    margin = rhs - bound
    holds = margin >= 0
    report.update(bound=bound, margin=margin, energy_margin=q1 - bound,
                  status="holds" if holds else "violated", holds=bool(holds))
    return report


# ---------------------------------------------------------------------------
# proof trace

def greedy_packing(p1, p2, eps):
    """Indices of a maximal family of disjoint eps-balls centered at the given points.

    Farthest-first from the first point: each accepted center is more than
    2 eps from every earlier one, and the loop ends when no point is.
    """
    return kernels.greedy_pack(p1, p2, 2.0 * eps)


def packing_checks(p1, p2, centers, eps):
    """(min pairwise center distance, number of points outside every 2 eps-ball)."""
    c1, c2 = p1[centers], p2[centers]
    if centers.size > 1:
        d = torus_dist_array(c1[:, None], c2[:, None], c1[None, :], c2[None, :])
        d[np.diag_indices_from(d)] = np.inf
        min_sep = float(d.min())
    else:
        min_sep = math.inf
    best = np.full(p1.size, np.inf)
    for a, b in zip(c1, c2):
        np.minimum(best, torus_dist_array(p1, p2, a, b), out=best)
    uncovered = int(np.count_nonzero(best > 2.0 * eps))
    return min_sep, uncovered


@dataclass
class SliceRecord:
    s: float
    l_s: float
    l_half_minus_s: float
    hoelder_residual: float
    hoelder_residual_half: float
    n_pack: int
    min_center_separation: float
    uncovered: int
    area: float
    covering_margin: float
    packing_area_margin: float
    area_margin: float
    length_margin: float | None
    tol_area: float
    tol_length: float


@dataclass
class ProofTrace:
    mode: str
    hypotheses: dict
    constants: dict
    tolerances: dict
    slices: list = field(default_factory=list)
    final: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "schema": 1,
            "mode": self.mode,
            "hypotheses": self.hypotheses,
            "constants": self.constants,
            "tolerances": self.tolerances,
            "slices": [asdict(r) for r in self.slices],
            "final": self.final,
        }

    def failures(self):
        """Names of checks whose margin falls below its tolerance."""
        bad = []
        for r in self.slices:
            if r.hoelder_residual < -self.tolerances["hoelder"] or \
                    r.hoelder_residual_half < -self.tolerances["hoelder"]:
                bad.append(f"hoelder@{r.s}")
            if r.uncovered or r.min_center_separation <= 2 * self.hypotheses["eps"]:
                bad.append(f"packing@{r.s}")
            if r.covering_margin < -r.tol_area:
                bad.append(f"covering@{r.s}")
            if r.area_margin < -r.tol_area:
                bad.append(f"area@{r.s}")
            if r.length_margin is not None and r.length_margin < -r.tol_length:
                bad.append(f"length@{r.s}")
        fm = self.final.get("margin")
        if fm is not None and fm < -self.tolerances["final"]:
            bad.append("final")
        return bad

    @property
    def ok(self):
        return not self.failures()


def proof_trace(subject, kappa, kappa_prime, eps, s_samples=8, grid_res=1024,
                quad_points=1024, pack_res=256, energy_res=512) -> ProofTrace:
    """Instantiate each inequality of the energy lower-bound argument on a concrete map.

    When the determinant and mixing hypotheses are certified (``conditional``
    mode) the boundary-length and final energy bounds are checked too;
    otherwise (``unconditional``) only the Hoelder, packing/covering and area
    steps, which need no mixing, are evaluated.

    Tolerances: counting areas on an n-grid errs by at most about sqrt(2) L / n
    for a boundary of length L, so area checks use (sqrt(2) L + 4) / n;
    lengths use 1 / quad_points; the final energy check uses 1 / energy_res.
    """
    if not (0.0 < eps <= 0.25):
        raise DomainError(f"eps must lie in (0, 1/4], got {eps}")
    consts = bound_constant(kappa, kappa_prime)
    mp = as_map(subject)
    jac = mp.jacobian_arrays(*cell_centers(energy_res, energy_res))
    det = np.abs(jac[0] * jac[3] - jac[1] * jac[2])
    det_ok = bool(det.min() >= det_floor(kappa_prime, float(sum(a * a for a in jac).max())))
    c1, c2 = cell_centers(grid_res, grid_res)
    _, pre2 = mp.backward(c1, c2)
    image = build_image_indicator(lambda x1, x2: pre2.ravel() < 0.5, grid_res)
    verdict = mixes_at_scale(image, MixingParams(kappa, eps, eps / 4, grid_res))
    conditional = det_ok and verdict.passed
    q1, q2 = cell_centers(pack_res, pack_res)
    q1, q2 = q1.ravel(), q2.ravel()
    _, qpre = mp.backward(q1, q2)
    tol_h = 1e-9
    trace = ProofTrace(
        mode="conditional" if conditional else "unconditional",
        hypotheses={"det_abs_min": float(det.min()), "det_ok": det_ok,
                    "mixing": verdict.as_dict(), "eps": eps},
        constants=consts.as_dict(),
        tolerances={"hoelder": tol_h, "final": 1.0 / energy_res,
                    "area": "(sqrt(2) * (l_s + l_half_minus_s) + 4) / grid_res",
                    "length": 1.0 / quad_points, "grid_res": grid_res,
                    "pack_res": pack_res, "quad_points": quad_points},
    )
    cell = 1.0 / (grid_res * grid_res)
    for j in range(s_samples):
        s = (j + 0.5) / (4 * s_samples)
        l_s, sq_s, res_s = slice_stats(mp, s, quad_points)
        l_h, sq_h, res_h = slice_stats(mp, 0.5 - s, quad_points)
        inside = (pre2 >= s) & (pre2 <= 0.5 - s)
        area = np.count_nonzero(inside) * cell
        pts = (qpre >= s) & (qpre <= 0.5 - s)
        p1, p2 = q1[pts], q2[pts]
        centers = greedy_packing(p1, p2, eps)
        min_sep, uncovered = packing_checks(p1, p2, centers, eps)
        n = int(centers.size)
        boundary = l_s + l_h
        tol_area = (math.sqrt(2.0) * boundary + 4.0) / grid_res
        trace.slices.append(SliceRecord(
            s=s, l_s=l_s, l_half_minus_s=l_h,
            hoelder_residual=res_s,
            hoelder_residual_half=res_h,
            n_pack=n, min_center_separation=min_sep, uncovered=uncovered,
            area=area,
            covering_margin=4.0 * math.pi * eps * eps * n - area,
            packing_area_margin=min(1.0, area + eps * boundary + math.pi * eps * eps)
            - n * math.pi * eps * eps,
            area_margin=area - kappa_prime * (0.5 - 2.0 * s),
            length_margin=(boundary - consts.m * n * eps) if conditional else None,
            tol_area=tol_area,
            tol_length=1.0 / quad_points,
        ))
    if conditional:
        e1, e2 = cell_centers(energy_res, energy_res)
        dens = _density(mp.jacobian_arrays(e1, e2))
        energy_a = math.fsum(dens[e2 < 0.5].tolist()) / dens.size
        lower = half_energy_bound(kappa_prime, consts.m, eps)
        trace.final = {"energy_on_A": energy_a, "lower_bound": lower, "margin": energy_a - lower}
    return trace
