"""Fourier-Motzkin elimination: an independent feasibility decision for small systems.

Only used to cross-check the simplex engine.  Equalities are eliminated first by
substitution; the remaining inequalities ``a x <= b`` are projected one variable
at a time, pruning rows with Kohler's criterion (a row combined from more than
``t + 1`` original rows after ``t`` eliminations is redundant).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, FrozenSet, List, Tuple

from .ratlp import LinearSystem

Row = Tuple[Tuple[Fraction, ...], Fraction]


def _normalize(coeffs: Tuple[Fraction, ...], rhs: Fraction) -> Row:
    scale = max((abs(c) for c in coeffs if c), default=Fraction(0))
    if scale:
        return tuple(c / scale for c in coeffs), rhs / scale
    return coeffs, rhs


def fm_feasible(sys: LinearSystem) -> bool:
    n = len(sys.variables)
    idx = {v: i for i, v in enumerate(sys.variables)}
    eqs: List[Row] = []
    ineqs: List[Row] = []  # a x <= b
    for c in sys.constraints:
        a = [Fraction(0)] * n
        for v, x in c.coeffs:
            a[idx[v]] += x
        row = (tuple(a), c.rhs)
        if c.rel == "=":
            eqs.append(row)
        elif c.rel == "<=":
            ineqs.append(row)
        else:
            ineqs.append((tuple(-x for x in a), -c.rhs))
    for i in range(n):
        unit = [Fraction(0)] * n
        unit[i] = Fraction(-1)
        ineqs.append((tuple(unit), Fraction(0)))

    # substitute equalities away
    while eqs:
        a, b = eqs.pop()
        piv = next((j for j, x in enumerate(a) if x), None)
        if piv is None:
            if b != 0:
                return False
            continue
        p = a[piv]

        def subst(row: Row) -> Row:
            r, rb = row
            f = r[piv] / p
            if not f:
                return row
            return tuple(x - f * y for x, y in zip(r, a)), rb - f * b

        eqs = [subst(r) for r in eqs]
        ineqs = [subst(r) for r in ineqs]

    rows: List[Tuple[Row, FrozenSet[int]]] = [(_normalize(*r), frozenset({i})) for i, r in enumerate(ineqs)]
    for step, j in enumerate(range(n)):
        pos, neg, rest = [], [], []
        for row, hist in rows:
            c = row[0][j]
            (pos if c > 0 else neg if c < 0 else rest).append((row, hist))
        combined: Dict[Row, FrozenSet[int]] = {}
        for row, hist in rest:
            combined.setdefault(row, hist)
        for (pa, pb), ph in pos:
            for (na, nb), nh in neg:
                hist = ph | nh
                if len(hist) > step + 2:
                    continue
                cp, cn = pa[j], -na[j]
                coeffs = tuple(cn * x + cp * y for x, y in zip(pa, na))
                row = _normalize(coeffs, cn * pb + cp * nb)
                if row not in combined or len(hist) < len(combined[row]):
                    combined[row] = hist
        rows = list(combined.items())
        for (a, b), _ in rows:
            if not any(a) and b < 0:
                return False
    return all(b >= 0 for (a, b), _ in rows if not any(a))
