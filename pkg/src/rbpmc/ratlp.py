"""Exact rational linear programming.

Feasibility of systems ``A x (=|>=|<=) b, x >= 0`` is decided by a phase-one
simplex over :class:`fractions.Fraction` with Bland's anti-cycling rule.
Infeasible systems come with a Farkas certificate: multipliers ``y`` with
``y_i >= 0`` on ``>=`` rows, ``y_i <= 0`` on ``<=`` rows, such that
``sum_i y_i a_i <= 0`` componentwise while ``sum_i y_i b_i > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

RELATIONS = ("=", ">=", "<=")

stats = {"solves": 0, "pivots": 0}


def as_fraction(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


@dataclass(frozen=True)
class Constraint:
    coeffs: Tuple[Tuple[str, Fraction], ...]
    rel: str
    rhs: Fraction

    def value(self, assignment: Mapping[str, Fraction]) -> Fraction:
        return sum((c * assignment.get(v, Fraction(0)) for v, c in self.coeffs), Fraction(0))

    def holds(self, assignment: Mapping[str, Fraction]) -> bool:
        lhs = self.value(assignment)
        if self.rel == "=":
            return lhs == self.rhs
        if self.rel == ">=":
            return lhs >= self.rhs
        return lhs <= self.rhs


@dataclass
class LinearSystem:
    """Variables are implicitly nonnegative."""

    variables: List[str] = field(default_factory=list)
    constraints: List[Constraint] = field(default_factory=list)

    def add_variable(self, name: str) -> str:
        if name not in self._index():
            self.variables.append(name)
        return name

    def _index(self) -> Dict[str, int]:
        return {v: i for i, v in enumerate(self.variables)}

    def add(self, coeffs: Mapping[str, object], rel: str, rhs: object = 0) -> None:
        if rel not in RELATIONS:
            raise ValueError(f"relation must be one of {RELATIONS}, got {rel!r}")
        known = set(self.variables)
        merged: Dict[str, Fraction] = {}
        for v, c in coeffs.items():
            if v not in known:
                raise ValueError(f"constraint mentions undeclared variable {v!r}")
            merged[v] = merged.get(v, Fraction(0)) + as_fraction(c)
        row = tuple((v, c) for v, c in merged.items() if c != 0)
        self.constraints.append(Constraint(row, rel, as_fraction(rhs)))

    def copy(self) -> "LinearSystem":
        return LinearSystem(list(self.variables), list(self.constraints))

    def with_lower_bound(self, var: str, bound: object = 1) -> "LinearSystem":
        sys = self.copy()
        sys.add({var: 1}, ">=", bound)
        return sys

    def satisfied_by(self, assignment: Mapping[str, Fraction]) -> bool:
        if any(assignment.get(v, Fraction(0)) < 0 for v in self.variables):
            return False
        return all(c.holds(assignment) for c in self.constraints)

    def is_homogeneous(self) -> bool:
        return all(c.rhs == 0 for c in self.constraints)

    def is_additive(self) -> bool:
        """True when the solution set is closed under addition."""
        for c in self.constraints:
            if c.rel == "=" and c.rhs != 0:
                return False
            if c.rel == ">=" and c.rhs < 0:
                return False
            if c.rel == "<=" and c.rhs > 0:
                return False
        return True

    def to_dict(self) -> dict:
        return {
            "variables": list(self.variables),
            "constraints": [{"coeffs": {v: str(c) for v, c in k.coeffs}, "rel": k.rel, "rhs": str(k.rhs)}
                            for k in self.constraints],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "LinearSystem":
        sys = cls(list(d["variables"]))
        for c in d["constraints"]:
            sys.add({v: Fraction(x) for v, x in c["coeffs"].items()}, c["rel"], Fraction(c["rhs"]))
        return sys


@dataclass(frozen=True)
class Solution:
    assignment: Dict[str, Fraction]

    @property
    def support(self) -> frozenset:
        return frozenset(v for v, x in self.assignment.items() if x > 0)

    def __getitem__(self, var: str) -> Fraction:
        return self.assignment.get(var, Fraction(0))

    def __add__(self, other: "Solution") -> "Solution":
        keys = set(self.assignment) | set(other.assignment)
        return Solution({v: self[v] + other[v] for v in keys})

    def scale(self, c: object) -> "Solution":
        c = as_fraction(c)
        return Solution({v: c * x for v, x in self.assignment.items()})


@dataclass(frozen=True)
class Infeasible:
    """Farkas multipliers, one per constraint (by position)."""

    certificate: Tuple[Fraction, ...]

    def verify(self, sys: LinearSystem) -> bool:
        y = self.certificate
        if len(y) != len(sys.constraints):
            return False
        combo: Dict[str, Fraction] = {v: Fraction(0) for v in sys.variables}
        rhs = Fraction(0)
        for yi, c in zip(y, sys.constraints):
            if c.rel == ">=" and yi < 0:
                return False
            if c.rel == "<=" and yi > 0:
                return False
            for v, a in c.coeffs:
                combo[v] += yi * a
            rhs += yi * c.rhs
        return all(x <= 0 for x in combo.values()) and rhs > 0

    def __bool__(self) -> bool:
        return False


Result = Union[Solution, Infeasible]


def feasible(sys: LinearSystem) -> Result:
    """Decide feasibility exactly; returns a Solution or an Infeasible certificate."""
    stats["solves"] += 1
    nvar = len(sys.variables)
    index = {v: i for i, v in enumerate(sys.variables)}
    rows = sys.constraints
    m = len(rows)
    if m == 0:
        return Solution({v: Fraction(0) for v in sys.variables})
    slack_cols: List[Optional[int]] = []
    ncols = nvar
    for c in rows:
        if c.rel == "=":
            slack_cols.append(None)
        else:
            slack_cols.append(ncols)
            ncols += 1
    art0 = ncols
    width = ncols + m
    flips: List[int] = []
    tab: List[List[Fraction]] = []
    zero = Fraction(0)
    for r, c in enumerate(rows):
        row = [zero] * (width + 1)
        for v, a in c.coeffs:
            row[index[v]] += a
        if slack_cols[r] is not None:
            row[slack_cols[r]] = Fraction(-1) if c.rel == ">=" else Fraction(1)
        row[width] = c.rhs
        sign = -1 if c.rhs < 0 else 1
        if sign < 0:
            row = [-x for x in row]
        row[art0 + r] = Fraction(1)
        flips.append(sign)
        tab.append(row)
    basis = [art0 + r for r in range(m)]
    cost = [zero] * ncols + [Fraction(1)] * m

    def reduced(j: int) -> Fraction:
        return cost[j] - sum((cost[basis[r]] * tab[r][j] for r in range(m)), zero)

    while True:
        # objective row: z_j = c_j - c_B^T B^-1 A_j
        obj = [cost[j] for j in range(width)]
        for r in range(m):
            cb = cost[basis[r]]
            if cb:
                row = tab[r]
                for j in range(width):
                    if row[j]:
                        obj[j] -= cb * row[j]
        entering = next((j for j in range(width) if obj[j] < 0), None)
        if entering is None:
            break
        best: Optional[Tuple[Fraction, int, int]] = None
        for r in range(m):
            a = tab[r][entering]
            if a > 0:
                key = (tab[r][width] / a, basis[r], r)
                if best is None or key[:2] < best[:2]:
                    best = key
        if best is None:  # cannot happen: phase one is bounded below by 0
            raise AssertionError("unbounded phase-one objective")
        pr = best[2]
        _pivot(tab, pr, entering)
        basis[pr] = entering
        stats["pivots"] += 1

    objective = sum((tab[r][width] for r in range(m) if basis[r] >= art0), zero)
    if objective > 0:
        # y'_r = c_B^T B^-1 e_r, read off the artificial columns; undo the row flips
        y = []
        for r in range(m):
            j = art0 + r
            yr = cost[j] - reduced(j)
            y.append(yr * flips[r])
        cert = Infeasible(tuple(y))
        if not cert.verify(sys):
            raise AssertionError("internal error: Farkas certificate failed to verify")
        return cert
    values = [zero] * width
    for r in range(m):
        values[basis[r]] = tab[r][width]
    sol = Solution({v: values[i] for v, i in index.items()})
    if not sys.satisfied_by(sol.assignment):
        raise AssertionError("internal error: simplex solution failed to verify")
    return sol


def _pivot(tab: List[List[Fraction]], pr: int, pc: int) -> None:
    prow = tab[pr]
    inv = 1 / prow[pc]
    if inv != 1:
        prow[:] = [x * inv for x in prow]
    nz = [j for j, x in enumerate(prow) if x]
    for r, row in enumerate(tab):
        if r == pr:
            continue
        f = row[pc]
        if f:
            for j in nz:
                row[j] -= f * prow[j]


def support_maximal_solution(sys: LinearSystem, probes: Optional[Sequence[str]] = None) -> Result:
    """A solution whose support is maximal among all solutions of an additive system.

    For each probe variable v not yet in the support, solve sys with v >= 1 and add
    the solution found; sums of solutions stay solutions because the solution set is
    closed under addition (homogeneous equalities, and inequalities whose right-hand
    side has the sign that makes doubling harmless).
    """
    if not sys.is_additive():
        raise ValueError("support-maximal solutions need a system closed under addition")
    base = feasible(sys)
    if isinstance(base, Infeasible):
        return base
    total = base
    known = set(total.support)
    for v in (sys.variables if probes is None else probes):
        if v in known:
            continue
        r = feasible(sys.with_lower_bound(v, 1))
        if isinstance(r, Solution):
            total = total + r
            known |= r.support
    return total
