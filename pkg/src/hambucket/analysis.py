"""Survival probabilities and runtime exponents for the bucketing solver.

Everything here is closed-form combinatorics plus one-dimensional numeric
optimization.  Probabilities are handled as base-2 logarithms; impossible
events are float("-inf"), which saturates correctly under addition and
comparison.  Exact integer counting twins (bucket_count and friends) back
the log forms so they can be checked against brute-force enumeration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .solver import EXACT, SolverParams, Strategy, bucket_accept

NEG_INF = float("-inf")
_LN2 = math.log(2.0)


def round_nearest(x: float) -> int:
    """Round to the nearest integer, halves away from zero-ward (floor(x+1/2))."""
    return int(math.floor(x + 0.5))


def round_even(x: float) -> int:
    """Nearest even integer."""
    return 2 * int(math.floor(x / 2.0 + 0.5))


def binary_entropy(x: float) -> float:
    """H(x) = -x log2 x - (1-x) log2 (1-x), with H(0) = H(1) = 0."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"entropy argument outside [0, 1]: {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -(x * math.log2(x) + (1.0 - x) * math.log2(1.0 - x))


def _entropy_arr(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = (x > 0.0) & (x < 1.0)
    xm = x[m]
    out[m] = -(xm * np.log2(xm) + (1.0 - xm) * np.log2(1.0 - xm))
    return out


def inverse_entropy(y: float) -> float:
    """The unique x in [0, 1/2] with H(x) = y, by bisection to full precision."""
    if not 0.0 <= y <= 1.0:
        raise ValueError(f"inverse entropy argument outside [0, 1]: {y}")
    if y == 0.0:
        return 0.0
    if y == 1.0:
        return 0.5
    lo, hi = 0.0, 0.5
    while True:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            return mid
        if binary_entropy(mid) < y:
            lo = mid
        else:
            hi = mid


def _log2_comb(n: int, m: int) -> float:
    if m < 0 or m > n:
        return NEG_INF
    if n <= 4096:
        return math.log2(math.comb(n, m))
    # Stirling via lgamma; relative error ~1e-14, plenty below any tolerance
    # used on the asymptotic side.
    return (math.lgamma(n + 1) - math.lgamma(m + 1) - math.lgamma(n - m + 1)) / _LN2


# --- exact counting twins ---------------------------------------------------


def bucket_count(k: int, delta_count: int) -> int:
    """#{z in F_2^k : wt(x + z) = delta_count}, independent of x."""
    if k < 1:
        raise ValueError("k must be positive")
    if not 0 <= delta_count <= k:
        return 0
    return math.comb(k, delta_count)


def pair_survival_count(k: int, gamma_count: int, delta_count: int) -> int:
    """#{z : wt(x + z) = wt(y + z) = delta_count} for any x, y at distance gamma_count.

    Zero when gamma_count is odd (the two weights differ mod 2) or when the
    split is otherwise infeasible.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if not 0 <= gamma_count <= k or not 0 <= delta_count <= k:
        return 0
    if gamma_count % 2:
        return 0
    b = gamma_count // 2
    a = delta_count - b
    if a < 0 or a > k - gamma_count:
        return 0
    return math.comb(gamma_count, b) * math.comb(k - gamma_count, a)


def strategy_survival_count(k: int, gamma_count: int, delta_count: int, strategy: Strategy) -> int:
    """#{z : both block weights pass the bucket rule} for x, y at distance gamma_count.

    Generalizes pair_survival_count: the rule need not pin both weights to the
    same value, so the split over the differing coordinates may be uneven.
    With wt(x + z) = t + m and wt(y + z) = (gamma_count - t) + m, sum over the
    t coordinates where z sides with y and the m agreeing coordinates it flips.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if not 0 <= gamma_count <= k or not 0 <= delta_count <= k:
        return 0
    total = 0
    for t in range(gamma_count + 1):
        ct = math.comb(gamma_count, t)
        for m in range(k - gamma_count + 1):
            if bucket_accept(t + m, delta_count, strategy) and bucket_accept(
                gamma_count - t + m, delta_count, strategy
            ):
                total += ct * math.comb(k - gamma_count, m)
    return total


def enumerate_pq_oracle(k: int, gamma_count: int, delta_count: int) -> tuple[int, int]:
    """Brute-force (p_count, q_count) by enumerating all 2^k values of z.

    Places x = 0 and y = the first gamma_count coordinates; by symmetry the
    counts do not depend on that choice.  Guarded to k <= 20.
    """
    if not 1 <= k <= 20:
        raise ValueError("enumeration oracle is limited to 1 <= k <= 20")
    if not 0 <= gamma_count <= k:
        raise ValueError("gamma_count outside [0, k]")
    if not 0 <= delta_count <= k:
        raise ValueError("delta_count outside [0, k]")
    z = np.arange(1 << k, dtype=np.uint64)
    wz = np.bitwise_count(z)
    y = np.uint64((1 << gamma_count) - 1)
    wyz = np.bitwise_count(z ^ y)
    hit_p = wz == delta_count
    p_count = int(hit_p.sum())
    q_count = int((hit_p & (wyz == delta_count)).sum())
    return p_count, q_count


def verify_survival_counts(kmax: int = 14) -> tuple[int, list[str]]:
    """Check the closed-form counts against enumeration for every k <= kmax.

    Returns (cases_checked, mismatch_descriptions); an empty second element
    means the closed forms are exact on the whole range.
    """
    if not 2 <= kmax <= 20:
        raise ValueError("kmax must be in [2, 20]")
    mismatches: list[str] = []
    cases = 0
    for k in range(2, kmax + 1):
        for g in range(0, k + 1, 2):
            for m in range(0, k + 1):
                p_cnt, q_cnt = enumerate_pq_oracle(k, g, m)
                cases += 1
                if p_cnt != bucket_count(k, m):
                    mismatches.append(f"p mismatch at k={k} m={m}: {bucket_count(k, m)} != {p_cnt}")
                if q_cnt != pair_survival_count(k, g, m):
                    mismatches.append(
                        f"q mismatch at k={k} g={g} m={m}: {pair_survival_count(k, g, m)} != {q_cnt}"
                    )
    return cases, mismatches


# --- log-probabilities ------------------------------------------------------


def bucket_prob_p(k: int, delta: float) -> float:
    """log2 Pr[wt(x + z) = round(delta k)] over uniform z in F_2^k."""
    if k < 1:
        raise ValueError("k must be positive")
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta outside [0, 1]: {delta}")
    m = min(round_nearest(delta * k), k)
    return _log2_comb(k, m) - k


def pair_survival_prob_q(k: int, gamma: float, delta: float) -> float:
    """log2 Pr[wt(x + z) = wt(y + z) = round(delta k)] for dist(x, y) = gamma k.

    The planted distance is forced to the nearest even integer g.  The target
    weight rounds the same way bucket_prob_p rounds it, and the weight outside
    the difference support is what remains, a = round(delta k) - g/2; deriving
    a independently from (delta - gamma/2) k can disagree with the bucket
    weight by one and push q above p, which a joint probability of nested
    events must never do.  Returns -inf when the split is infeasible.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma outside [0, 1]: {gamma}")
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta outside [0, 1]: {delta}")
    g = round_even(gamma * k)
    if g < 0 or g > k:
        return NEG_INF
    a = round_nearest(delta * k) - g // 2
    if a < 0 or a > k - g:
        return NEG_INF
    return _log2_comb(g, g // 2) + _log2_comb(k - g, a) - k


# --- asymptotic exponents ---------------------------------------------------


class Regime(Enum):
    BELOW_GAMMA_STAR = "below-gamma-star"
    ABOVE_GAMMA_STAR = "above-gamma-star"


@dataclass(frozen=True)
class ExponentResult:
    """A runtime exponent theta together with the bucket radius achieving it."""

    theta: float
    delta: float
    regime: Regime
    delta_star: float
    gamma_star: float


def delta_gamma_star(lam: float) -> tuple[float, float]:
    """(delta_star, gamma_star) = (Hinv(1 - lambda), 2 d*(1 - d*))."""
    if not 0.0 < lam <= 1.0:
        raise ValueError(f"lambda outside (0, 1]: {lam}")
    ds = inverse_entropy(1.0 - lam)
    return ds, 2.0 * ds * (1.0 - ds)


def _bucket_exponent(delta, eta):
    """(1-eta) (1 - H((delta - eta/2) / (1-eta))), vectorized.

    The per-coordinate exponent of a pair at relative distance eta both
    landing in an exact radius-delta bucket.  Callers guarantee feasibility
    eta <= min(2 delta, 2 (1-delta)); values are clipped against float fuzz.
    """
    delta = np.asarray(delta, dtype=float)
    eta = np.asarray(eta, dtype=float)
    rem = 1.0 - eta
    safe = rem > 1e-12
    u = np.clip(np.divide(delta - eta / 2.0, rem, where=safe, out=np.zeros(np.broadcast(delta, eta).shape)), 0.0, 1.0)
    out = np.where(safe, rem * (1.0 - _entropy_arr(u)), 0.0)
    return out


def theta_uniform(lam: float, gamma: float) -> ExponentResult:
    """Runtime exponent of the bucketing solver on uniform lists.

    Below gamma_star the optimum bucket radius is delta_star and the solver
    beats the quadratic bound; above it the expected number of gamma-close
    pairs dominates and theta = 2 lambda + H(gamma) - 1.
    """
    if not 0.0 <= gamma <= 0.5:
        raise ValueError(f"gamma outside [0, 1/2]: {gamma}")
    ds, gs = delta_gamma_star(lam)
    if gamma <= gs:
        theta = float(_bucket_exponent(ds, gamma))
        return ExponentResult(theta, ds, Regime.BELOW_GAMMA_STAR, ds, gs)
    delta = 0.5 * (1.0 - math.sqrt(1.0 - 2.0 * gamma))
    theta = 2.0 * lam + binary_entropy(gamma) - 1.0
    return ExponentResult(theta, delta, Regime.ABOVE_GAMMA_STAR, ds, gs)


def expected_pairs_exponent(lam: float, gamma: float) -> float:
    """log2 E[#cross pairs at distance gamma d] / d, clamped at zero."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma outside [0, 1]: {gamma}")
    if not 0.0 < lam <= 1.0:
        raise ValueError(f"lambda outside (0, 1]: {lam}")
    return max(0.0, 2.0 * lam + binary_entropy(gamma) - 1.0)


def lower_bound_exponent(lam: float, gamma: float) -> float:
    """Optimum achievable exponent: max(lambda/(1-gamma), expected pairs)."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma outside [0, 1): {gamma}")
    return max(lam / (1.0 - gamma), expected_pairs_exponent(lam, gamma))


# --- input distributions ----------------------------------------------------


@dataclass(frozen=True)
class DistributionModel:
    """How list vectors are drawn: uniform, fixed weight, Bernoulli, or Poisson weight."""

    kind: str
    param: float | None = None

    _KINDS = ("uniform", "fixed", "bernoulli", "poisson")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == "uniform":
            if self.param is not None:
                raise ValueError("uniform model takes no parameter")
        else:
            if self.param is None or not 0.0 <= self.param <= 1.0:
                raise ValueError(f"model parameter must be in [0, 1], got {self.param}")

    @classmethod
    def uniform(cls) -> "DistributionModel":
        return cls("uniform")

    @classmethod
    def fixed_weight(cls, eta: float) -> "DistributionModel":
        return cls("fixed", eta)

    @classmethod
    def bernoulli(cls, mu: float) -> "DistributionModel":
        return cls("bernoulli", mu)

    @classmethod
    def poisson_weight(cls, mean_fraction: float) -> "DistributionModel":
        return cls("poisson", mean_fraction)

    def token(self) -> str:
        """Wire form: uniform | fixed:<eta> | bernoulli:<mu> | poisson:<f>."""
        if self.kind == "uniform":
            return "uniform"
        return f"{self.kind}:{self.param!r}"

    @classmethod
    def from_token(cls, token: str) -> "DistributionModel":
        if token == "uniform":
            return cls.uniform()
        kind, sep, arg = token.partition(":")
        if not sep or kind not in cls._KINDS or kind == "uniform":
            raise ValueError(f"malformed model token {token!r}")
        try:
            param = float(arg)
        except ValueError:
            raise ValueError(f"malformed model parameter in {token!r}") from None
        return cls(kind, param)


def _lpw_arr(model: DistributionModel, eta: np.ndarray) -> np.ndarray:
    """log2 Pr[wt(v + w) = eta d] / d for independent model draws v, w."""
    eta = np.asarray(eta, dtype=float)
    kind, par = model.kind, model.param
    if kind == "poisson":
        # Poisson weight concentrates at its mean on the exponential scale;
        # treat it as fixed weight there.  Tagged as an approximation at the
        # CLI surface.
        kind, par = "fixed", par
    if kind == "uniform":
        return _entropy_arr(eta) - 1.0
    if kind == "bernoulli":
        tau = 2.0 * par * (1.0 - par)
        if tau == 0.0:
            return np.where(eta == 0.0, 0.0, NEG_INF)
        t1 = np.where(eta > 0.0, eta * math.log2(tau), 0.0)
        t2 = np.where(eta < 1.0, (1.0 - eta) * math.log2(1.0 - tau), 0.0)
        return _entropy_arr(eta) + t1 + t2
    # fixed weight f: overlap counting over the two supports
    f = par
    if f == 0.0 or f == 1.0:
        return np.where(eta == 0.0, 0.0, NEG_INF)
    feas = eta <= 2.0 * min(f, 1.0 - f) + 1e-12
    u1 = np.clip(np.where(feas, eta, 0.0) / (2.0 * f), 0.0, 1.0)
    u2 = np.clip(np.where(feas, eta, 0.0) / (2.0 * (1.0 - f)), 0.0, 1.0)
    val = f * _entropy_arr(u1) + (1.0 - f) * _entropy_arr(u2) - binary_entropy(f)
    return np.where(feas, val, NEG_INF)


def log_pair_weight_prob(model: DistributionModel, eta: float) -> float:
    """Scalar form of the pair-weight exponent at relative distance eta."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta outside [0, 1]: {eta}")
    return float(_lpw_arr(model, np.array([eta]))[0])


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(f, lo: float, hi: float, tol: float = 1e-9) -> tuple[float, float]:
    """Golden-section minimum of f on [lo, hi]; returns the best point seen."""
    best_x, best_v = lo, f(lo)
    for x in (hi,):
        v = f(x)
        if v < best_v:
            best_x, best_v = x, v
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
            x, v = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
            x, v = d, fd
        if v < best_v:
            best_x, best_v = x, v
    return best_x, best_v


def epsilon_distribution(lam: float, delta: float, model: DistributionModel) -> float:
    """Exponent of expected bucket collisions beyond the planted pair.

    epsilon = 2 lambda - min over feasible pair distances eta of
    [bucket exponent at eta minus the pair-weight exponent].  The objective
    can be non-convex, so the minimum is seeded on a 10^3 grid and refined
    locally by golden section.
    """
    if not 0.0 < lam <= 1.0:
        raise ValueError(f"lambda outside (0, 1]: {lam}")
    if not 0.0 <= delta <= 0.5:
        raise ValueError(f"delta outside [0, 1/2]: {delta}")
    eta_max = min(1.0, 2.0 * delta)
    grid = np.linspace(0.0, eta_max, 1001)
    obj = _bucket_exponent(delta, grid) - _lpw_arr(model, grid)
    i = int(np.argmin(obj))
    best = float(obj[i])
    if eta_max > 0.0:
        lo = float(grid[max(i - 1, 0)])
        hi = float(grid[min(i + 1, len(grid) - 1)])

        def scalar(eta: float) -> float:
            val = float(_bucket_exponent(delta, eta)) - log_pair_weight_prob(model, eta)
            return val if math.isfinite(val) else math.inf

        _, refined = _golden_min(scalar, lo, hi)
        best = min(best, refined)
    return 2.0 * lam - best


def theta_distribution(lam: float, gamma: float, model: DistributionModel) -> ExponentResult:
    """Runtime exponent for lists drawn from an arbitrary weight model.

    Minimizes, over bucket radii delta in [gamma/2, 1/2], the largest of the
    three tree costs: pair survival, list traversal, and stray collisions
    (epsilon_distribution).  For the uniform model this reproduces
    theta_uniform.
    """
    if not 0.0 <= gamma <= 0.5:
        raise ValueError(f"gamma outside [0, 1/2]: {gamma}")
    ds, gs = delta_gamma_star(lam)
    d_lo, d_hi = gamma / 2.0, 0.5

    deltas = np.linspace(d_lo, d_hi, 1000)
    etas = np.linspace(0.0, 1.0, 1001)
    lpw = _lpw_arr(model, etas)
    bracket = _bucket_exponent(deltas[:, None], etas[None, :]) - lpw[None, :]
    feas = (etas[None, :] <= 2.0 * deltas[:, None] + 1e-15) & np.isfinite(lpw)[None, :]
    bracket = np.where(feas, bracket, np.inf)
    eps = 2.0 * lam - bracket.min(axis=1)

    survive = _bucket_exponent(deltas, gamma)
    traverse = lam + survive - (1.0 - _entropy_arr(deltas))
    exponent = np.maximum(np.maximum(survive, traverse), eps + survive)
    i = int(np.argmin(exponent))

    def scalar(delta: float) -> float:
        a = float(_bucket_exponent(delta, gamma))
        t2 = lam + a - (1.0 - binary_entropy(delta))
        t3 = epsilon_distribution(lam, delta, model) + a
        return max(a, t2, t3)

    # The seeding grid evaluates epsilon on the eta grid only, which biases it
    # low; the refinement below re-evaluates everything through the refined
    # scalar objective so the reported minimum is consistent.
    lo = float(deltas[max(i - 1, 0)])
    hi = float(deltas[min(i + 1, len(deltas) - 1)])
    best_x, best_v = _golden_min(scalar, lo, hi)
    mid_v = scalar(float(deltas[i]))
    if mid_v < best_v:
        best_x, best_v = float(deltas[i]), mid_v
    # Once the stray-collision budget saturates the surface flattens toward
    # delta = 1/2 and the grid argmin can land well short of the boundary, so
    # refine the last cell too.
    if i < len(deltas) - 1:
        bx, bv = _golden_min(scalar, float(deltas[-2]), d_hi)
        if bv < best_v:
            best_x, best_v = bx, bv
        end_v = scalar(d_hi)
        if end_v < best_v:
            best_x, best_v = d_hi, end_v
    regime = Regime.BELOW_GAMMA_STAR if gamma <= gs else Regime.ABOVE_GAMMA_STAR
    return ExponentResult(best_v, best_x, regime, ds, gs)


# --- practical parameter choice ----------------------------------------------


def choose_params(
    d: int,
    lam: float,
    gamma: float,
    *,
    depth: int | None = None,
    branching: int | None = None,
    permutations: int | None = None,
    delta: float | None = None,
    strategy: Strategy | None = None,
    naive_threshold: int | None = None,
    stop_on_first: bool | None = None,
    branching_cap: int = 512,
) -> SolverParams:
    """Concrete solver parameters for a d-dimensional instance.

    Every keyword given overrides the corresponding default; the rest follow
    the asymptotic recipe adapted to finite d:

    - delta: delta_star below gamma_star, else the smallest radius that keeps
      pair survival possible, (1 - sqrt(1 - 2 gamma)) / 2
    - depth: d / log2(d)^2 rounded, clamped to [1, min(8, d // 4)]
    - branching: d / q for the actual first-block width and acceptance rule,
      capped (the cap keeps failed subtree walks affordable; several shallower
      permutation rounds recover the success probability)
    - naive_threshold: cost-balanced against branching so filtering a subrange
      never costs more popcounts than just scanning it, floored at 32 and kept
      well under the list length so the tree actually runs
    """
    if d < 1:
        raise ValueError("d must be positive")
    if not 0.0 < lam <= 1.0:
        raise ValueError(f"lambda outside (0, 1]: {lam}")
    if not 0.0 <= gamma <= 0.5:
        raise ValueError(f"gamma outside [0, 1/2]: {gamma}")
    ds, gs = delta_gamma_star(lam)
    if delta is None:
        delta = ds if gamma <= gs else 0.5 * (1.0 - math.sqrt(1.0 - 2.0 * gamma))
    if depth is None:
        depth = 1 if d < 4 else round_nearest(d / math.log2(d) ** 2)
        depth = max(1, min(depth, 8, d // 4 if d >= 4 else 1))
    if not 1 <= depth <= d:
        raise ValueError(f"depth outside [1, {d}]: {depth}")
    strategy = EXACT if strategy is None else strategy
    k = d // depth
    # survival under the acceptance rule actually in force; a deviation window
    # or a degenerate at-most radius can keep pairs the exact rule cannot
    g = round_even(gamma * k)
    survivors = 0
    if 0 <= g <= k:
        survivors = strategy_survival_count(k, g, round_nearest(delta * k), strategy)
    if survivors == 0:
        raise ValueError(f"no z can keep a pair at gamma={gamma:g} with delta={delta:g} on width {k}")
    log_q = math.log2(survivors) - k
    if branching is None:
        if math.log2(d) - log_q >= math.log2(branching_cap):
            branching = branching_cap
        else:
            branching = max(1, round_nearest(d * 2.0 ** (-log_q)))
    if naive_threshold is None:
        n_over_8 = 2.0 ** (lam * d) / 8.0
        naive_threshold = max(32, min(branching, int(n_over_8)))
    return SolverParams(
        depth=depth,
        branching=branching,
        permutations=4 if permutations is None else permutations,
        delta=delta,
        strategy=strategy,
        naive_threshold=naive_threshold,
        stop_on_first=False if stop_on_first is None else stop_on_first,
    )
