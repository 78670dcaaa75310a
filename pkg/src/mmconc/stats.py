"""Distance and diameter estimators on empirical data.

Kolmogorov-Smirnov statistics, exact one-dimensional Prohorov distance,
binned total variation, the Ky Fan distance, partial diameters of
samples and of the continuous radial laws, and witness-family lower
bounds for the observable diameter.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import gaussian
from .errors import DomainError


@dataclass(frozen=True)
class EmpiricalSample:
    """A sorted collection of real draws with provenance metadata."""

    values: np.ndarray
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        vals = np.sort(np.asarray(self.values, dtype=np.float64).reshape(-1))
        if vals.size < 1:
            raise DomainError("sample must be non-empty")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_values(cls, values, **meta):
        return cls(np.asarray(values), dict(meta))

    @property
    def size(self):
        return self.values.size


def _values(sample):
    if isinstance(sample, EmpiricalSample):
        return sample.values
    return np.sort(np.asarray(sample, dtype=np.float64).reshape(-1))


def partial_diameter(sample, kappa):
    """Shortest length of a window holding a (1 - kappa) fraction.

    Exact for empirical measures: the optimal set is a run of
    consecutive sorted points; ties go to the leftmost window.
    """
    vals = _values(sample)
    S = vals.size
    if kappa >= 1.0:
        warnings.warn("kappa >= 1 leaves an empty mass requirement; returning 0")
        return 0.0
    if kappa <= 0.0:
        return float(vals[-1] - vals[0])
    w = int(math.ceil((1.0 - kappa) * S))
    if w <= 1:
        return 0.0
    return float(np.min(vals[w - 1 :] - vals[: S - w + 1]))


def _interval_mass_open(sorted_vals, a, b):
    """Number of points in the open interval (a, b)."""
    return np.searchsorted(sorted_vals, b, side="left") - np.searchsorted(
        sorted_vals, a, side="right"
    )


def _max_deficit(nu_atoms, nu_w, mu_sorted, eps):
    """max over subsets A of nu-atoms of nu(A) - mu(eps-inflation of A).

    Dynamic program over atoms in increasing order; the inflation of a
    chosen subset is a union of open intervals, and the best subset
    ending at atom i either starts a fresh interval or extends a chain
    whose previous atom lies within 2 eps.
    """
    K = nu_atoms.size
    M = mu_sorted.size
    best = np.empty(K)
    far_max = 0.0  # best over atoms ending at least 2 eps to the left
    far_ptr = 0
    lefts = np.searchsorted(mu_sorted, nu_atoms + eps, side="left")
    for i in range(K):
        x = nu_atoms[i]
        solo = nu_w[i] - _interval_mass_open(mu_sorted, x - eps, x + eps) / M
        while far_ptr < i and nu_atoms[far_ptr] <= x - 2.0 * eps:
            far_max = max(far_max, best[far_ptr])
            far_ptr += 1
        cand = solo + max(0.0, far_max)
        # Chain options: predecessor j with x - 2 eps < x_j < x.
        j = far_ptr
        if j < i:
            incr = (lefts[i] - lefts[j:i]) / M
            cand = max(cand, float(np.max(best[j:i] + nu_w[i] - incr)))
        best[i] = cand
    return float(np.max(best)) if K else 0.0


def _aggregate(vals):
    uniq, counts = np.unique(vals, return_counts=True)
    return uniq, counts / vals.size


def prohorov_1d(a, b, tol=1e-12):
    """Exact Prohorov distance of two one-dimensional empirical measures.

    Checks the inflation inequality on subsets of atoms in both
    directions (sufficient in one dimension) and bisects over eps.
    """
    xa = _values(a)
    xb = _values(b)
    # The inflation below uses open intervals, which degenerate at
    # eps = 0; equal measures are the only case with distance exactly 0.
    if xa.size == xb.size and np.array_equal(xa, xb):
        return 0.0
    ua, wa = _aggregate(xa)
    ub, wb = _aggregate(xb)

    def feasible(eps):
        return (
            _max_deficit(ub, wb, xa, eps) <= eps
            and _max_deficit(ua, wa, xb, eps) <= eps
        )

    hi = max(1.0, float(max(xa[-1], xb[-1]) - min(xa[0], xb[0])))
    lo = 0.0
    if feasible(0.0):
        return 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
        if hi - lo <= tol:
            break
    return hi


def tv_binned(a, b, bins):
    """Half the L1 distance of binned frequencies on a common grid."""
    xa = _values(a)
    xb = _values(b)
    if np.isscalar(bins):
        lo = min(xa[0], xb[0])
        hi = max(xa[-1], xb[-1])
        if hi <= lo:
            hi = lo + 1.0
        edges = np.linspace(lo, hi, int(bins) + 1)
    else:
        edges = np.asarray(bins, dtype=np.float64)
    pa, _ = np.histogram(xa, bins=edges)
    pb, _ = np.histogram(xb, bins=edges)
    pa = pa / xa.size
    pb = pb / xb.size
    # Mass outside the grid still separates the measures.
    pa = np.append(pa, 1.0 - pa.sum())
    pb = np.append(pb, 1.0 - pb.sum())
    return 0.5 * float(np.sum(np.abs(pa - pb)))


def ky_fan(values):
    """Smallest eps with at most an eps fraction of distances above it.

    Exact by sorting: with d_(k+1) the (k+1)-th largest distance, the
    answer is min over k of max(d_(k+1), k/S).
    """
    d = np.sort(np.asarray(values, dtype=np.float64).reshape(-1))[::-1]
    S = d.size
    if S == 0:
        return 0.0
    d_next = np.append(d[1:], 0.0)
    ks = np.arange(1, S + 1) / S
    # eps = d_(1) with zero exceedances is always feasible.
    best = min(float(d[0]), float(np.min(np.maximum(d_next, ks))))
    return max(0.0, best)


def ks_statistic(values, cdf):
    """One-sample Kolmogorov-Smirnov statistic against a CDF callable."""
    v = _values(values)
    n = v.size
    F = np.asarray(cdf(v), dtype=np.float64)
    up = np.max(np.arange(1, n + 1) / n - F)
    down = np.max(F - np.arange(0, n) / n)
    return float(max(up, down))


def ks_two_sample(x, y):
    """Two-sample Kolmogorov-Smirnov statistic of the two EDFs."""
    x = _values(x)
    y = _values(y)
    allv = np.concatenate([x, y])
    allv.sort(kind="mergesort")
    fx = np.searchsorted(x, allv, side="right") / x.size
    fy = np.searchsorted(y, allv, side="right") / y.size
    return float(np.max(np.abs(fx - fy)))


def kolmogorov_critical(alpha):
    """c with Q(c) = alpha for the asymptotic Kolmogorov law."""
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")

    def q(c):
        total = 0.0
        for k in range(1, 101):
            term = 2.0 * (-1.0) ** (k - 1) * math.exp(-2.0 * k * k * c * c)
            total += term
            if abs(term) < 1e-16:
                break
        return total

    from .special import bisect

    # The alternating series is only usable away from 0; Q(0.2) is
    # already > 1 - 1e-4, which covers every practical alpha.
    if q(0.2) < alpha:
        raise DomainError("alpha too close to 1 for the asymptotic series")
    return bisect(lambda c: q(c) - alpha, 0.2, 5.0, tol=1e-12)


def ks_critical(n, m=None, alpha=0.01):
    """Asymptotic critical value for one- or two-sample KS tests."""
    if n < 1000 or (m is not None and m < 1000):
        raise DomainError("asymptotic critical values need sample sizes >= 1000")
    c = kolmogorov_critical(alpha)
    if m is None:
        return c / math.sqrt(n)
    return c * math.sqrt((n + m) / (n * m))


# ---------------------------------------------------------------------------
# Witness families for observable-diameter lower bounds.


@dataclass(frozen=True)
class Witness:
    """A named 1-Lipschitz real function on batched component arrays."""

    name: str
    fn: object

    def __call__(self, comps):
        return np.asarray(self.fn(comps), dtype=np.float64)


def coordinate_witness(e_comps, name="coordinate"):
    """Z -> Re<E, Z> for a fixed direction E with ||E|| = 1."""
    e = np.asarray(e_comps, dtype=np.float64)
    norm = float(np.sqrt(np.sum(np.square(e))))
    if norm <= 0:
        raise DomainError("witness direction must be nonzero")
    e = e / norm
    return Witness(name, lambda comps: np.sum(comps * e, axis=(-3, -2, -1)))


def column_norm_witness(l, name=None):
    def fn(comps, l=l):
        return np.sqrt(np.sum(np.square(comps[..., :, l, :]), axis=(-2, -1)))

    return Witness(name or "column_norm_%d" % l, fn)


def distance_witness(z0_comps, name="distance"):
    z0 = np.asarray(z0_comps, dtype=np.float64)

    def fn(comps):
        return np.sqrt(np.sum(np.square(comps - z0), axis=(-3, -2, -1)))

    return Witness(name, fn)


def total_norm_witness(name="total_norm"):
    """Z -> ||Z||; on scalar-orbit quotients this is the orbit norm."""
    return Witness(name, lambda comps: np.sqrt(np.sum(np.square(comps), axis=(-3, -2, -1))))


@dataclass(frozen=True)
class WitnessFamily:
    witnesses: tuple

    @classmethod
    def of(cls, *witnesses):
        return cls(tuple(witnesses))

    def verify_lipschitz(self, pair_comps, tol=1e-9):
        """Check the 1-Lipschitz property on random pairs.

        pair_comps is a pair (Zs, Ws) of batched component arrays.
        """
        Zs, Ws = pair_comps
        dists = np.sqrt(np.sum(np.square(Zs - Ws), axis=(-3, -2, -1)))
        ok = {}
        for w in self.witnesses:
            gaps = np.abs(w(Zs) - w(Ws))
            with np.errstate(invalid="ignore", divide="ignore"):
                ratio = np.where(dists > 0, gaps / np.where(dists > 0, dists, 1.0), 0.0)
            ok[w.name] = float(np.max(ratio)) <= 1.0 + tol
        return ok


@dataclass(frozen=True)
class ObsDiamReport:
    per_witness: dict
    max_value: float


def obs_diam_lower(comps, witnesses, kappa):
    """Witness-family lower bound for the observable diameter.

    The true invariant takes a sup over all 1-Lipschitz functions; the
    max over this finite family only certifies the lower side.
    """
    if isinstance(witnesses, WitnessFamily):
        family = witnesses.witnesses
    else:
        family = tuple(witnesses)
    per = {}
    for w in family:
        per[w.name] = partial_diameter(w(comps), kappa)
    return ObsDiamReport(per_witness=per, max_value=max(per.values()) if per else 0.0)


def law_partial_diameter(dim, kappa, tol=1e-8):
    """Exact partial diameter of the radial law in the given dimension.

    Minimizes the quantile gap Q(u + 1 - kappa) - Q(u) over the left
    endpoint u by golden-section search, with the endpoints included.
    """
    if not 0.0 < kappa < 1.0:
        raise DomainError("kappa must lie in (0, 1)")
    law = gaussian.RadialLaw.of(dim)
    mass = 1.0 - kappa
    tiny = 1e-12

    def gap(u):
        u = min(max(u, tiny), kappa - tiny)
        return law.quantile(u + mass) - law.quantile(u)

    lo, hi = 0.0, kappa
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - inv_phi * (hi - lo)
    x2 = lo + inv_phi * (hi - lo)
    f1, f2 = gap(x1), gap(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv_phi * (hi - lo)
            f1 = gap(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv_phi * (hi - lo)
            f2 = gap(x2)
    return min(gap(lo), gap(hi), gap(0.5 * (lo + hi)))
