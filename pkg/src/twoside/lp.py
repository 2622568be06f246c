"""Exact feasibility of mixed weak/strict linear inequality systems.

Every constraint reads ``sum(coeffs[x] * x) + const >= 0`` (or ``> 0`` when
strict).  Feasibility is decided by maximizing a uniform slack ``s`` with an
exact two-phase simplex (Bland's rule, ``Fraction`` pivots):

1. give every constraint the slack ``s``; if the optimum is positive the
   optimizer is returned (it sits at the centre of the tightest pair, e.g.
   ``{x >= 0, x <= 1}`` gives ``x = 1/2``); if it is negative the weak system
   is already infeasible;
2. otherwise only strict constraints get the slack, capped at 1, and the
   system is feasible iff that optimum is positive.

An unbounded slack is capped at 1 and the problem solved again.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from twoside.errors import InputError, guard

MAX_LP_CELLS = 400_000


@dataclass(frozen=True)
class Constraint:
    coeffs: Mapping[str, Fraction]
    const: Fraction
    strict: bool = False

    def value(self, point: Mapping[str, Fraction]) -> Fraction:
        return sum((c * point[x] for x, c in self.coeffs.items()), Fraction(self.const))

    def holds(self, point: Mapping[str, Fraction]) -> bool:
        val = self.value(point)
        return val > 0 if self.strict else val >= 0


@dataclass
class LinearSystem:
    variables: tuple
    constraints: list = field(default_factory=list)

    def add(self, coeffs: Mapping[str, Fraction], const, strict: bool = False) -> None:
        clean = {x: Fraction(c) for x, c in coeffs.items() if c != 0}
        for x in clean:
            if x not in self.variables:
                raise InputError(f"constraint names unknown variable {x!r}")
        self.constraints.append(Constraint(clean, Fraction(const), strict))

    def satisfied_by(self, point: Mapping[str, Fraction]) -> bool:
        return all(c.holds(point) for c in self.constraints)


# simplex on: maximize c.z subject to A z <= b, z >= 0


def _pivot(rows: list, obj: list, basis: list, r: int, col: int) -> None:
    row = rows[r]
    piv = row[col]
    if piv != 1:
        rows[r] = row = [x / piv for x in row]
    for i, other in enumerate(rows):
        if i != r and other[col] != 0:
            f = other[col]
            rows[i] = [a - f * b for a, b in zip(other, row)]
    if obj[col] != 0:
        f = obj[col]
        obj[:] = [a - f * b for a, b in zip(obj, row)]
    basis[r] = col


def _iterate(rows: list, obj: list, basis: list, allowed: int) -> bool:
    """Bland-rule iterations on columns ``< allowed``; False when unbounded."""
    while True:
        col = next((j for j in range(allowed) if obj[j] < 0), None)
        if col is None:
            return True
        best = None
        for i, row in enumerate(rows):
            if row[col] > 0:
                ratio = row[-1] / row[col]
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return False
        _pivot(rows, obj, basis, best[1], col)


def simplex_max(c: list, a: list, b: list):
    """Return ``("optimal", z, value)``, ``("infeasible",)`` or ``("unbounded",)``."""
    n, m = len(c), len(a)
    width = n + m + m  # originals, slacks, artificials
    rows, basis = [], []
    needs_art = []
    for i in range(m):
        row = [Fraction(0)] * (width + 1)
        sign = 1 if b[i] >= 0 else -1
        for j in range(n):
            row[j] = sign * Fraction(a[i][j])
        row[n + i] = Fraction(sign)
        row[-1] = sign * Fraction(b[i])
        if sign > 0:
            basis.append(n + i)
        else:
            row[n + m + i] = Fraction(1)
            basis.append(n + m + i)
            needs_art.append(i)
        rows.append(row)
    if needs_art:
        obj = [Fraction(0)] * (width + 1)
        for i in needs_art:
            obj[n + m + i] = Fraction(1)
        for i in needs_art:
            obj = [x - y for x, y in zip(obj, rows[i])]
        _iterate(rows, obj, basis, width)
        if obj[-1] != 0:
            return ("infeasible",)
        # drive zero-level artificials out of the basis
        for i in range(len(rows) - 1, -1, -1):
            if basis[i] >= n + m:
                col = next((j for j in range(n + m) if rows[i][j] != 0), None)
                if col is None:
                    del rows[i]
                    del basis[i]
                else:
                    _pivot(rows, [Fraction(0)] * (width + 1), basis, i, col)
    rows = [row[: n + m] + [row[-1]] for row in rows]
    obj = [Fraction(0)] * (n + m + 1)
    for j in range(n):
        obj[j] = -Fraction(c[j])
    for i, col in enumerate(basis):
        if obj[col] != 0:
            f = obj[col]
            obj = [x - f * y for x, y in zip(obj, rows[i])]
    if not _iterate(rows, obj, basis, n + m):
        return ("unbounded",)
    z = [Fraction(0)] * n
    for i, col in enumerate(basis):
        if col < n:
            z[col] = rows[i][-1]
    return ("optimal", z, obj[-1])


def _max_slack(system: LinearSystem, with_slack: list, cap: bool):
    """Maximize ``s`` with ``a.x + const >= s`` on flagged rows, ``>= 0`` elsewhere."""
    names = list(system.variables)
    k = len(names)
    index = {x: j for j, x in enumerate(names)}
    # columns: x+ (k), x- (k), s+, s-
    a, b = [], []
    for con, slack in zip(system.constraints, with_slack):
        row = [Fraction(0)] * (2 * k + 2)
        for x, coef in con.coeffs.items():
            row[index[x]] = -coef
            row[k + index[x]] = coef
        if slack:
            row[2 * k] = Fraction(1)
            row[2 * k + 1] = Fraction(-1)
        a.append(row)
        b.append(con.const)
    if cap:
        row = [Fraction(0)] * (2 * k + 2)
        row[2 * k], row[2 * k + 1] = Fraction(1), Fraction(-1)
        a.append(row)
        b.append(Fraction(1))
    c = [Fraction(0)] * (2 * k) + [Fraction(1), Fraction(-1)]
    guard("LP cells (variables x constraints)", (2 * k + 2) * (len(a) + 1), MAX_LP_CELLS)
    res = simplex_max(c, a, b)
    if res[0] != "optimal":
        return res
    z = res[1]
    point = {x: z[j] - z[k + j] for j, x in enumerate(names)}
    return ("optimal", point, res[2])


def lp_feasible(system: LinearSystem) -> Optional[dict]:
    """An exact point meeting every constraint (strict ones strictly), or None."""
    if not system.variables:
        ok = all(c.holds({}) for c in system.constraints)
        return {} if ok else None
    rows = [True] * len(system.constraints)
    res = _max_slack(system, rows, cap=False)
    if res[0] == "unbounded":
        res = _max_slack(system, rows, cap=True)
    if res[0] == "infeasible":
        return None
    _, point, s = res
    if s > 0:
        return point
    if s < 0:
        return None
    strict = [c.strict for c in system.constraints]
    if not any(strict):
        return point
    res = _max_slack(system, strict, cap=True)
    if res[0] != "optimal" or res[2] <= 0:
        return None
    return res[1]
