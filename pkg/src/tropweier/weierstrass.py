"""Reduction of Weierstrass divisors to a skeleton, from slope data.

Two evaluation modes are kept apart: :func:`reduce_weierstrass` takes the full
slope lists and returns an integer divisor, :func:`midpoint_weierstrass`
takes only the smallest slope per direction and returns a rational one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple

from .graph import Divisor, Point


class SlopeDataError(ValueError):
    pass


@dataclass(frozen=True)
class ArcKey:
    tail: str
    head: str
    edge: Optional[str] = None

    @classmethod
    def parse(cls, text: str, edge: Optional[str] = None) -> "ArcKey":
        tail, sep, head = text.partition("->")
        if not sep:
            raise SlopeDataError(f"arc {text!r} is not of the form 'x->y'")
        return cls(tail.strip(), head.strip(), edge)

    @property
    def partner(self) -> "ArcKey":
        return ArcKey(self.head, self.tail, self.edge)

    def __str__(self) -> str:
        return f"{self.tail}->{self.head}"


@dataclass
class VertexSlopes:
    id: str
    d_x: int
    g_x: int
    directions: Dict[ArcKey, Tuple[int, ...]] = field(default_factory=dict)
    val: Optional[int] = None

    @property
    def valence(self) -> int:
        return self.val if self.val is not None else len(self.directions)


@dataclass
class SlopeData:
    """Slope data of a linear series of rank ``r`` at the vertices of a model.

    In full mode every direction carries ``r + 1`` slopes; in surrogate mode
    only ``(s_0,)``.
    """

    n: int
    r: int
    vertices: Dict[str, VertexSlopes]

    @property
    def mode(self) -> str:
        lens = {len(s) for v in self.vertices.values() for s in v.directions.values()}
        if lens <= {self.r + 1}:
            return "full"
        if lens <= {1}:
            return "surrogate"
        return "mixed"

    @property
    def degree(self) -> int:
        return sum(v.d_x for v in self.vertices.values())

    def s0(self, key: ArcKey) -> int:
        v = self.vertices.get(key.tail)
        if v is None or key not in v.directions:
            raise SlopeDataError(f"no slope data for arc {key}")
        return v.directions[key][0]

    @classmethod
    def from_json(cls, data: dict) -> "SlopeData":
        r = int(data["r"])
        verts = {}
        for item in data["vertices"]:
            dirs = {}
            for d in item.get("directions", []):
                key = ArcKey.parse(d["arc"], d.get("edge"))
                if "slopes" in d:
                    dirs[key] = tuple(int(s) for s in d["slopes"])
                elif "s0" in d:
                    dirs[key] = (int(d["s0"]),)
                else:
                    raise SlopeDataError(f"direction {d['arc']} has neither 'slopes' nor 's0'")
            verts[item["id"]] = VertexSlopes(
                item["id"], int(item.get("d_x", 0)), int(item.get("g_x", 0)), dirs, item.get("val")
            )
        return cls(int(data.get("n", 1)), r, verts)

    def to_json(self) -> dict:
        out = []
        for v in self.vertices.values():
            dirs = []
            for key, sl in v.directions.items():
                item = {"arc": str(key)}
                if key.edge is not None:
                    item["edge"] = key.edge
                if len(sl) == 1 and self.r > 0:
                    item["s0"] = sl[0]
                else:
                    item["slopes"] = list(sl)
                dirs.append(item)
            entry = {"id": v.id, "d_x": v.d_x, "g_x": v.g_x, "directions": dirs}
            if v.val is not None:
                entry["val"] = v.val
            out.append(entry)
        return {"n": self.n, "r": self.r, "vertices": out}


def _check_list(s: Sequence[int], r: int, where: str = "") -> None:
    if len(s) != r + 1:
        raise SlopeDataError(f"{where}expected {r + 1} slopes, got {len(s)}")
    for a, b in zip(s, s[1:]):
        if a >= b:
            raise SlopeDataError(f"{where}slopes {list(s)} are not strictly increasing")


def coefficient(r: int, d_x: int, g_x: int, val: int, lists: Sequence[Sequence[int]]) -> int:
    """``(r+1) d_x + r(r+1)/2 (2 g_x - 2 + val) - sum of all slopes``."""
    return (r + 1) * d_x + r * (r + 1) // 2 * (2 * g_x - 2 + val) - sum(sum(s) for s in lists)


def reduce_weierstrass(data: SlopeData) -> Divisor:
    coeffs = {}
    for v in data.vertices.values():
        for key, sl in v.directions.items():
            _check_list(sl, data.r, f"{v.id} along {key}: ")
        coeffs[Point.vertex(v.id)] = coefficient(data.r, v.d_x, v.g_x, v.valence, list(v.directions.values()))
    return Divisor(coeffs)


def midpoint_weierstrass(data: SlopeData) -> Divisor:
    """Surrogate coefficients with ``s_r`` recovered from the partner arc:
    ``(r+1) [d_x + r/2 (2 g_x - 2 + val) - sum (s_0 - s_0') / 2]``."""
    r = data.r
    coeffs = {}
    for v in data.vertices.values():
        acc = Fraction(0)
        for key, sl in v.directions.items():
            acc += Fraction(sl[0] - data.s0(key.partner), 2)
        c = (r + 1) * (v.d_x + Fraction(r, 2) * (2 * v.g_x - 2 + v.valence) - acc)
        coeffs[Point.vertex(v.id)] = c
    return Divisor(coeffs)


def local_weight(s: Sequence[int], r: Optional[int] = None) -> int:
    """``s_0 + ... + s_r - r(r+1)/2``.  Negative orders (poles) are allowed."""
    r = len(s) - 1 if r is None else r
    _check_list(s, r)
    return sum(s) - r * (r + 1) // 2


def total_weight_checks(curve_genus: int, r: int, weights: Sequence[int]) -> bool:
    return sum(weights) == (curve_genus - 1) * r * (r + 1)


# ---------------------------------------------------------------------------
# Wronskians of monomials


def _falling(s: int, j: int) -> int:
    out = 1
    for k in range(j):
        out *= s - k
    return out


class _Poly:
    """Dense polynomial in ``t`` with rational coefficients."""

    __slots__ = ("c",)

    def __init__(self, coeffs):
        c = [Fraction(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.c = c

    @classmethod
    def monomial(cls, coef, exp):
        if coef == 0:
            return cls([])
        return cls([0] * exp + [coef])

    def __bool__(self):
        return bool(self.c)

    def __mul__(self, other):
        if not self.c or not other.c:
            return _Poly([])
        out = [Fraction(0)] * (len(self.c) + len(other.c) - 1)
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(other.c):
                    out[i + j] += a * b
        return _Poly(out)

    def __sub__(self, other):
        n = max(len(self.c), len(other.c))
        a = self.c + [Fraction(0)] * (n - len(self.c))
        b = other.c + [Fraction(0)] * (n - len(other.c))
        return _Poly([x - y for x, y in zip(a, b)])

    def __neg__(self):
        return _Poly([-x for x in self.c])

    def exact_div(self, other):
        num = list(self.c)
        den = other.c
        if not den:
            raise ZeroDivisionError("division by the zero polynomial")
        if len(num) < len(den):
            if any(num):
                raise ArithmeticError("inexact polynomial division")
            return _Poly([])
        q = [Fraction(0)] * (len(num) - len(den) + 1)
        for k in range(len(q) - 1, -1, -1):
            q[k] = num[k + len(den) - 1] / den[-1]
            for j, b in enumerate(den):
                num[k + j] -= q[k] * b
        if any(num):
            raise ArithmeticError("inexact polynomial division")
        return _Poly(q)

    def order(self) -> Optional[int]:
        for k, a in enumerate(self.c):
            if a:
                return k
        return None


def wronskian(s: Sequence[int]) -> _Poly:
    """``det(d^j/dt^j t^{s_i})`` by fraction-free elimination over ``Q[t]``."""
    n = len(s)
    a = [[_Poly.monomial(_falling(si, j), si - j if si >= j else 0) for j in range(n)] for si in s]
    sign, prev = 1, _Poly([1])
    for k in range(n - 1):
        piv = next((i for i in range(k, n) if a[i][k]), None)
        if piv is None:
            return _Poly([])
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]).exact_div(prev)
            a[i][k] = _Poly([])
        prev = a[k][k]
    det = a[n - 1][n - 1]
    return det if sign > 0 else -det


def wronskian_order(s: Sequence[int], r: Optional[int] = None) -> int:
    """Order of vanishing at ``t = 0`` of the Wronskian of ``t^{s_0}, ...``."""
    r = len(s) - 1 if r is None else r
    _check_list(s, r)
    if s[0] < 0:
        raise SlopeDataError("Wronskian orders need nonnegative exponents")
    order = wronskian(s).order()
    if order is None:
        raise ArithmeticError("Wronskian vanishes identically")
    return order
