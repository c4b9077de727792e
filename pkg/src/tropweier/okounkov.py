"""Slope families, their Okounkov intervals and equidistribution statistics."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .rational import RationalLike, as_fraction


class FeketeViolation(ValueError):
    def __init__(self, kind: str, n: int, m: int, detail: str):
        super().__init__(f"{kind} fails for (n, m) = ({n}, {m}): {detail}")
        self.kind, self.n, self.m = kind, n, m


@dataclass
class SlopeFamily:
    """``lists[n]`` is the increasing list ``s_{n,0} < ... < s_{n,r_n}``."""

    d: int
    g: int
    lists: Dict[int, Tuple[int, ...]]

    def __post_init__(self):
        self.lists = {int(n): tuple(int(s) for s in sl) for n, sl in sorted(self.lists.items())}
        for n, sl in self.lists.items():
            if not sl:
                raise ValueError(f"empty slope list for n = {n}")
            if any(a >= b for a, b in zip(sl, sl[1:])):
                raise ValueError(f"slope list for n = {n} is not strictly increasing")

    @property
    def ns(self) -> List[int]:
        return list(self.lists)

    def r(self, n: int) -> int:
        return len(self.lists[n]) - 1

    @classmethod
    def from_json(cls, data: dict) -> "SlopeFamily":
        return cls(int(data["d"]), int(data.get("g", 0)), {int(k): v for k, v in data["lists"].items()})

    def to_json(self) -> dict:
        return {"d": self.d, "g": self.g, "lists": {str(n): list(sl) for n, sl in self.lists.items()}}

    def shifted(self, c: int) -> "SlopeFamily":
        """Apply ``s -> s + c n`` to every list."""
        return SlopeFamily(self.d, self.g, {n: [s + c * n for s in sl] for n, sl in self.lists.items()})


# ---------------------------------------------------------------------------
# stock families


def arithmetic_family(n_max: int, d: int = 1) -> SlopeFamily:
    """``s_{n,i} = i`` for ``0 <= i <= nd``: the projective line with
    ``O(d)``."""
    return SlopeFamily(d, 0, {n: list(range(n * d + 1)) for n in range(1, n_max + 1)})


def pole_order_family(nongaps: Sequence[int], g: int, n_max: int) -> SlopeFamily:
    """Orders at a point ``p`` of functions with poles only at ``p`` of order
    at most ``n``, for a curve whose Weierstrass semigroup at ``p`` is
    generated by ``nongaps``.  ``d = 1``."""
    sg = set()
    frontier = {0}
    while frontier:
        sg |= frontier
        frontier = {a + b for a in frontier for b in nongaps if a + b <= n_max} - sg
    lists = {n: sorted(-k for k in sg if k <= n) for n in range(1, n_max + 1)}
    return SlopeFamily(1, g, lists)


def elliptic_family(n_max: int) -> SlopeFamily:
    return pole_order_family([2, 3], 1, n_max)


def genus_two_weierstrass_family(n_max: int) -> SlopeFamily:
    return pole_order_family([2, 5], 2, n_max)


# ---------------------------------------------------------------------------


@dataclass
class FeketeReport:
    N: int
    s_min_estimate: Fraction
    s_max_estimate: Fraction
    s_min_bracket: Tuple[Fraction, Fraction]
    s_max_bracket: Tuple[Fraction, Fraction]
    pairs_checked: int


def fekete_limits(family: SlopeFamily) -> FeketeReport:
    """Check ``s_{n+m,0} <= s_{n,0} + s_{m,0}`` and
    ``s_{n,r_n} + s_{m,r_m} <= s_{n+m,r_{n+m}}`` on all available pairs and
    bracket the limits of ``s_{n,0}/n`` and ``s_{n,r_n}/n``."""
    ns = family.ns
    if not ns or ns != list(range(1, len(ns) + 1)):
        raise ValueError("family must cover n = 1, 2, ..., N without gaps")
    L = family.lists
    checked = 0
    for n in ns:
        for m in ns:
            if m < n or n + m not in L:
                continue
            checked += 1
            lo = L[n + m][0]
            if lo > L[n][0] + L[m][0]:
                raise FeketeViolation("subadditivity of s_0", n, m, f"{lo} > {L[n][0]} + {L[m][0]}")
            hi = L[n + m][-1]
            if L[n][-1] + L[m][-1] > hi:
                raise FeketeViolation("superadditivity of s_r", n, m, f"{L[n][-1]} + {L[m][-1]} > {hi}")
    N = ns[-1]
    inf0 = min(Fraction(L[n][0], n) for n in ns)
    supr = max(Fraction(L[n][-1], n) for n in ns)
    d = family.d
    return FeketeReport(
        N,
        Fraction(L[N][0], N),
        Fraction(L[N][-1], N),
        (supr - d, inf0),
        (supr, inf0 + d),
        checked,
    )


def eta_n(family: SlopeFamily, n: int) -> List[Tuple[Fraction, Fraction]]:
    """Atoms ``(s / n, 1 / (r_n + 1))``."""
    sl = family.lists[n]
    w = Fraction(1, len(sl))
    return [(Fraction(s, n), w) for s in sl]


def _uniform_cdf(t: Fraction, a: Fraction, d: Fraction) -> Fraction:
    if t <= a:
        return Fraction(0)
    if t >= a + d:
        return Fraction(1)
    return (t - a) / d


def ks_uniformity(family: SlopeFamily, n: int, a: RationalLike = 0, d: Optional[RationalLike] = None) -> Fraction:
    """Kolmogorov-Smirnov distance between ``eta_n`` and the uniform law on
    ``[a, a + d]``."""
    a = as_fraction(a)
    d = Fraction(family.d) if d is None else as_fraction(d)
    xs = [x for x, _ in eta_n(family, n)]
    N = len(xs)
    best = Fraction(0)
    for k, x in enumerate(xs, start=1):
        u = _uniform_cdf(x, a, d)
        best = max(best, Fraction(k, N) - u, u - Fraction(k - 1, N))
    return best


def _abs_integral(c: Fraction, p: Fraction, q: Fraction, a: Fraction, d: Fraction) -> Fraction:
    """``integral_p^q |c - U(t)| dt`` with ``U`` the uniform CDF."""
    pts = sorted({p, q} | {t for t in (a, a + d, a + c * d) if p < t < q})
    total = Fraction(0)
    for s, t in zip(pts, pts[1:]):
        mid = (s + t) / 2
        # the integrand is affine on [s, t] and does not change sign there
        total += abs(c - _uniform_cdf(mid, a, d)) * (t - s)
    return total


def w1_uniformity(family: SlopeFamily, n: int, a: RationalLike = 0, d: Optional[RationalLike] = None) -> Fraction:
    """Exact Wasserstein-1 distance ``integral |F_eta - U|`` on the line."""
    a = as_fraction(a)
    d = Fraction(family.d) if d is None else as_fraction(d)
    xs = [x for x, _ in eta_n(family, n)]
    N = len(xs)
    lo, hi = min(xs[0], a), max(xs[-1], a + d)
    cuts = [lo] + xs + [hi]
    total = Fraction(0)
    for k in range(len(cuts) - 1):
        # on [cuts[k], cuts[k+1]) the empirical CDF equals k / N (k atoms passed)
        c = Fraction(max(0, min(k, N)), N)
        if cuts[k + 1] > cuts[k]:
            total += _abs_integral(c, cuts[k], cuts[k + 1], a, d)
    return total


def sminmax_gap(family: SlopeFamily, n: int) -> Fraction:
    """``(s_0 + s_r) / (2nd) - sum(s) / (nd (r+1))``."""
    sl = family.lists[n]
    nd = n * family.d
    return Fraction(sl[0] + sl[-1], 2 * nd) - Fraction(sum(sl), nd * len(sl))


def width_defect(family: SlopeFamily, n: int) -> Fraction:
    """``(s_{n,r_n} - s_{n,0}) / n - d``."""
    sl = family.lists[n]
    return Fraction(sl[-1] - sl[0], n) - family.d
