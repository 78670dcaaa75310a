"""Explicit scalar schedules and certified bounds.

Implements the near-orthogonality angle theta(eps), the growth-condition
checkers, the per-N schedule (p_N, a_N, eps_N, the truncated annuli
eps_{N,l} and ball radii T_{N,l}, theta_N, q_N, sigma_N), the sigma
recursion that controls how many nearly-orthonormal columns fit before
degeneracy, the frame-distance bound L(n, eps, theta), and the product
lower bound for the Gaussian mass of the approximation space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import gaussian
from .errors import ConfigError, DomainError, PreconditionError


def theta(eps):
    """Angle bound (5 eps^2 (1+eps) / ((1-eps) + 5 eps^2 (1+eps)))^(1/2)."""
    if not 0.0 < eps < 1.0:
        raise DomainError("theta requires 0 < eps < 1")
    t = 5.0 * eps * eps * (1.0 + eps)
    return math.sqrt(t / ((1.0 - eps) + t))


@dataclass(frozen=True)
class Condition:
    """Growth condition on n_N: kind 'ass' carries (a, a_prime), kind
    'condi' only a_prime.  The constant named c in the headline
    condition and a' in the explicit one are the same parameter; a
    single a_prime is exposed for both."""

    kind: str
    a: float | None = None
    a_prime: float = 0.5

    def __post_init__(self):
        if self.kind not in ("ass", "condi"):
            raise DomainError("condition kind must be 'ass' or 'condi'")
        if not 0.0 < self.a_prime < 1.0:
            raise DomainError("a_prime must lie in (0, 1)")
        if self.kind == "ass":
            if self.a is None or not 0.0 < self.a < 1.0:
                raise DomainError("'ass' needs a in (0, 1)")

    def exponent_a(self, p_N):
        if self.kind == "condi":
            return (1.0 + p_N) / 4.0
        return 0.5 * self.a * (1.0 - p_N)

    def expression(self, N, n):
        """The supremand whose boundedness the condition asserts."""
        if self.kind == "condi":
            return 2.0 * math.log(n) - 0.25 * self.a_prime * math.sqrt(N / n**3)
        return 2.0 * math.log(n) - 0.25 * self.a_prime * (N / n) ** (1.0 - self.a)


def condi(a_prime=0.5):
    return Condition("condi", None, a_prime)


def ass(a, a_prime=0.5):
    return Condition("ass", a, a_prime)


@dataclass(frozen=True)
class Schedule:
    N: int
    n_N: int
    condition: Condition
    p_N: float
    a_N: float
    eps_N: float
    b_N: float
    eps_l: np.ndarray
    T_l: np.ndarray
    theta_N: float
    q_N: float
    sigma_N: float
    L_bound: float

    @property
    def lip_bound(self):
        """(1 - L_bound)^(-1); defined only for L_bound < 1."""
        if not self.L_bound < 1.0:
            raise PreconditionError(
                "Lipschitz bound undefined: L_bound = %.6g >= 1" % self.L_bound
            )
        return 1.0 / (1.0 - self.L_bound)

    def theta_floor_sq(self, field_dimension=1):
        """Diagnostic: the necessary lower bound on theta_N^2.

        Largest over l of l T^2 / (l T^2 + (1 - eps_l)^2 ((N-l)^F - 1));
        any admissible angle has to exceed this, reported for context
        only and never substituted for theta_N.
        """
        out = 0.0
        for l in range(1, self.n_N):
            T2 = self.T_l[l - 1] ** 2
            e = self.eps_l[l - 1]
            denom = l * T2 + (1.0 - e) ** 2 * ((self.N - l) * field_dimension - 1.0)
            if denom > 0.0:
                out = max(out, l * T2 / denom)
        return out

    def to_json(self):
        return {
            "N": self.N,
            "n_N": self.n_N,
            "condition": {
                "kind": self.condition.kind,
                "a": self.condition.a,
                "a_prime": self.condition.a_prime,
            },
            "p_N": self.p_N,
            "a_N": self.a_N,
            "eps_N": self.eps_N,
            "b_N": self.b_N,
            "eps_l": [float(x) for x in self.eps_l],
            "T_l": [float(x) for x in self.T_l],
            "theta_N": self.theta_N,
            "q_N": self.q_N,
            "sigma_N": self.sigma_N,
            "L_bound": self.L_bound,
        }


def make_schedule(N, n_N, condition=None):
    """All derived scalars for one (N, n_N) under a growth condition."""
    if condition is None:
        condition = condi()
    if N < 3:
        raise PreconditionError("need N >= 3")
    if not 1 <= n_N <= N - 1:
        raise PreconditionError("need 1 <= n_N <= N - 1")
    logN1 = math.log(N - 1.0)
    p_N = math.log(n_N) / logN1
    a_N = condition.exponent_a(p_N)
    eps_N = math.exp(-a_N * logN1)
    b_N = 1.0 - eps_N
    ls = np.arange(1, n_N)
    root_full = math.sqrt(N - 1.0)
    root_part = np.sqrt(N - ls - 1.0)
    # Cancellation-free form of 1 - (1 - b eps) sqrt((N-1)/(N-l-1)).
    eps_l = (b_N * eps_N * root_full - ls / (root_full + root_part)) / root_part
    T_l = np.sqrt(
        np.maximum(
            (N - ls - 1.0) / ls * (eps_N - eps_l) * (eps_N + eps_l + 2.0), 0.0
        )
    )
    theta_N = theta(eps_N)
    q_N = 2.0 / (1.0 + p_N) * (p_N + 1.0 / 3.0)
    sigma_N = theta_N ** (2.0 - q_N)
    try:
        L_bound = l_bound(n_N, eps_N, sigma_N)
    except PreconditionError:
        L_bound = math.inf
    return Schedule(
        N=N,
        n_N=n_N,
        condition=condition,
        p_N=p_N,
        a_N=a_N,
        eps_N=eps_N,
        b_N=b_N,
        eps_l=eps_l,
        T_l=T_l,
        theta_N=theta_N,
        q_N=q_N,
        sigma_N=sigma_N,
        L_bound=L_bound,
    )


def phi_step(delta, s):
    """One recursion step (delta + s)^2 / (1 - s)."""
    return (delta + s) ** 2 / (1.0 - s)


def r_factor(delta, s):
    return 2.0 * (delta + s) / (1.0 - s)


@dataclass(frozen=True)
class SigmaRecursion:
    delta: float
    sigma: float
    s: np.ndarray
    c: np.ndarray
    n_sigma: int


def sigma_recursion(delta, sigma):
    """Run s_l = s_{l-1} + phi(s_{l-1}) until it reaches sigma.

    Returns all s_0 .. s_{n_sigma} together with the coefficients c_l
    computed from their own running-sum display (the closed relation
    delta^2 sum c_m^2 = s_l is left to cross-checks).
    """
    if delta <= 0.0:
        raise DomainError("delta must be positive")
    if not 0.0 <= sigma <= 1.0:
        raise DomainError("sigma must lie in [0, 1]")
    s = [0.0]
    while s[-1] < sigma:
        s.append(s[-1] + phi_step(delta, s[-1]))
    if len(s) == 1:
        # sigma <= 0 leaves the set in the max empty; one step is still
        # defined and the count is 1.
        s.append(s[0] + phi_step(delta, s[0]))
    n_sigma = len(s) - 1
    c = [0.0]
    sum_sq = 0.0
    for _ in range(1, n_sigma + 1):
        c_l = (1.0 + delta * sum_sq) / math.sqrt(1.0 - delta * delta * sum_sq)
        c.append(c_l)
        sum_sq += c_l * c_l
    return SigmaRecursion(
        delta=delta, sigma=sigma, s=np.array(s), c=np.array(c), n_sigma=n_sigma
    )


def l_bound(n, eps, sigma):
    """Certified upper bound on the worst frame distance of n nearly
    orthonormal columns: sqrt(n eps^2 + 2 n (1+eps) sigma / (1 + sqrt(1-sigma))).

    Valid only when n <= n_sigma(theta(eps)); violating that raises.
    """
    if n < 1:
        raise DomainError("need n >= 1")
    if not 0.0 <= sigma <= 1.0:
        raise DomainError("sigma must lie in [0, 1]")
    rec = sigma_recursion(theta(eps), sigma)
    if n > rec.n_sigma:
        raise PreconditionError(
            "n = %d exceeds n_sigma = %d for theta(eps) = %.6g"
            % (n, rec.n_sigma, rec.delta)
        )
    val = n * eps * eps + 2.0 * n * (1.0 + eps) * sigma / (1.0 + math.sqrt(1.0 - sigma))
    return math.sqrt(val)


def l_bound_min(n, eps):
    """The bound at the smallest admissible sigma for this n.

    The bound grows with sigma and every sigma > s_{n-1}(theta(eps)) is
    admissible, so the limiting value at s_{n-1} is also valid.
    """
    if n < 1:
        raise DomainError("need n >= 1")
    delta = theta(eps)
    s = 0.0
    for _ in range(n - 1):
        if s >= 1.0:
            return math.inf
        s = s + phi_step(delta, s)
    if s >= 1.0:
        return math.inf
    val = n * eps * eps + 2.0 * n * (1.0 + eps) * s / (1.0 + math.sqrt(1.0 - s))
    return math.sqrt(val)


def parse_rule(text):
    """Column-count rules: const:k, power:p, powerlog:p, table:path."""
    text = str(text).strip()
    if ":" not in text:
        raise ConfigError("rule %r is not of the form kind:value" % text)
    kind, arg = text.split(":", 1)
    if kind == "const":
        try:
            k = int(arg)
        except ValueError:
            raise ConfigError("const rule needs an integer, got %r" % arg)
        if k < 1:
            raise ConfigError("const rule needs k >= 1")
        return lambda N: k
    if kind == "power":
        p = _rule_float(arg)
        return lambda N: max(1, int(math.floor(N**p)))
    if kind == "powerlog":
        p = _rule_float(arg)
        return lambda N: max(1, int(math.floor((N / math.log(N)) ** p + 1.0)))
    if kind == "table":
        table = {}
        try:
            with open(arg) as fh:
                for line in fh:
                    line = line.strip()
                    if not line or line.startswith("#"):
                        continue
                    parts = line.replace(",", " ").split()
                    table[int(parts[0])] = int(parts[1])
        except OSError as exc:
            raise ConfigError("cannot read rule table %r: %s" % (arg, exc))
        except (ValueError, IndexError):
            raise ConfigError("rule table %r needs integer pairs per line" % arg)

        def lookup(N, table=table):
            if N not in table:
                raise ConfigError("rule table has no entry for N = %d" % N)
            return table[N]

        return lookup
    raise ConfigError("unknown rule kind %r" % kind)


@dataclass(frozen=True)
class ConditionReport:
    sup_value: float
    sup_at: int
    trend: str
    grid: np.ndarray
    values: np.ndarray


def condition_check(rule, N_max, condition=None):
    """Evaluate the growth-condition supremand over N up to N_max.

    Reports the running sup and a heuristic tail trend ('increasing' or
    'bounded').  Boundedness of a sup over all N is not decidable
    numerically; this never claims a proof.
    """
    if condition is None:
        condition = condi()
    if callable(rule):
        n_of = rule
    else:
        n_of = parse_rule(rule)
    N_max = int(N_max)
    if N_max < 4:
        raise DomainError("need N_max >= 4")
    dense = np.arange(3, min(N_max, 2000) + 1)
    grid = dense
    if N_max > 2000:
        coarse = np.unique(
            np.geomspace(2000, N_max, 400).astype(np.int64)
        )
        grid = np.unique(np.concatenate([dense, coarse]))
    vals = np.array(
        [condition.expression(int(N), max(1, int(n_of(int(N))))) for N in grid]
    )
    k = int(np.argmax(vals))
    tail = vals[-max(8, len(vals) // 10) :]
    prev = vals[-max(16, len(vals) // 5) : -max(8, len(vals) // 10)]
    trend = "increasing" if tail.mean() > prev.mean() + 1e-9 else "bounded"
    return ConditionReport(
        sup_value=float(vals[k]),
        sup_at=int(grid[k]),
        trend=trend,
        grid=grid,
        values=vals,
    )


def _rule_float(arg):
    try:
        return float(arg)
    except ValueError:
        raise ConfigError("rule needs a numeric argument, got %r" % arg)


@dataclass(frozen=True)
class VBound:
    v: np.ndarray
    product_lower: float


def v_bound(N, n, schedule, field="R"):
    """Per-level defect masses and the certified product lower bound.

    v_0 is the Gaussian mass outside the full annulus; level l >= 1
    combines l small-ball factors with the truncated annulus.  The
    product of (1 - v_l) bounds the Gaussian mass of the approximation
    space from below.
    """
    from .algebra import field_dim

    if schedule.N != N or schedule.n_N != n:
        raise PreconditionError("schedule does not match (N, n)")
    d = field_dim(field)
    v = np.empty(n)
    v[0] = 1.0 - gaussian.annulus_mass(N * d, schedule.eps_N).mass
    for l in range(1, n):
        e = float(schedule.eps_l[l - 1])
        if e <= 0.0:
            v[l] = 1.0
            continue
        ball = gaussian.ball_mass(d, float(schedule.T_l[l - 1]))
        ann = gaussian.annulus_mass((N - l) * d, e).mass
        v[l] = 1.0 - ball**l * ann
    return VBound(v=v, product_lower=float(np.prod(1.0 - v)))
