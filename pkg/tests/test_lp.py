from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from twoside.errors import InputError
from twoside.lp import LinearSystem, lp_feasible, simplex_max

F = Fraction


def fourier_motzkin(variables, rows):
    """Feasibility oracle: eliminate variables one by one.

    ``rows`` are ``(coeffs, const, strict)``; a combined row is strict when
    either parent is.
    """
    rows = [(dict(c), F(k), s) for c, k, s in rows]
    for x in variables:
        pos = [r for r in rows if r[0].get(x, 0) > 0]
        neg = [r for r in rows if r[0].get(x, 0) < 0]
        rest = [r for r in rows if r[0].get(x, 0) == 0]
        for cp, kp, sp in pos:
            for cn, kn, sn in neg:
                a, b = cp[x], -cn[x]
                coeffs = {}
                for y in set(cp) | set(cn):
                    if y != x:
                        coeffs[y] = b * cp.get(y, 0) + a * cn.get(y, 0)
                rest.append((coeffs, b * kp + a * kn, sp or sn))
        rows = rest
    return all(k > 0 if s else k >= 0 for _, k, s in rows)


def test_interval_midpoint():
    s = LinearSystem(("x",))
    s.add({"x": 1}, 0)
    s.add({"x": -1}, 1)
    assert lp_feasible(s) == {"x": F(1, 2)}


def test_strict_pair_infeasible():
    s = LinearSystem(("x",))
    s.add({"x": 1}, 0, strict=True)
    s.add({"x": -1}, 0, strict=True)
    assert lp_feasible(s) is None


def test_weak_touching_pair_feasible_but_not_strict():
    s = LinearSystem(("x",))
    s.add({"x": 1}, 0)
    s.add({"x": -1}, 0)
    assert lp_feasible(s) == {"x": 0}
    s.add({"x": 1}, 0, strict=True)
    assert lp_feasible(s) is None


def test_unbounded_direction():
    s = LinearSystem(("t",))
    s.add({"t": 1}, 1)
    assert s.satisfied_by(lp_feasible(s))


def test_empty_system_and_no_variables():
    assert lp_feasible(LinearSystem(("x",))) == {"x": 0}
    s = LinearSystem(())
    s.add({}, -1)
    assert lp_feasible(s) is None


def test_unknown_variable():
    with pytest.raises(InputError):
        LinearSystem(("x",)).add({"y": 1}, 0)


def test_simplex_textbook():
    status, z, value = simplex_max([1, 1], [[1, 2], [3, 1]], [4, 6])
    assert status == "optimal"
    assert z == [F(8, 5), F(6, 5)] and value == F(14, 5)
    assert simplex_max([1], [[1]], [-1]) == ("infeasible",)
    assert simplex_max([1], [[-1]], [0]) == ("unbounded",)


coef = st.integers(min_value=-3, max_value=3)
rows = st.lists(
    st.tuples(st.lists(coef, min_size=3, max_size=3), st.integers(min_value=-4, max_value=4), st.booleans()),
    min_size=1,
    max_size=6,
)


@settings(max_examples=300)
@given(rows, st.integers(min_value=1, max_value=3))
def test_feasibility_matches_elimination(raw, nvars):
    names = ("a", "b", "c")[:nvars]
    s = LinearSystem(names)
    oracle_rows = []
    for cs, k, strict in raw:
        coeffs = {x: c for x, c in zip(names, cs) if c}
        s.add(coeffs, k, strict)
        oracle_rows.append((coeffs, k, strict))
    point = lp_feasible(s)
    assert (point is not None) == fourier_motzkin(names, oracle_rows)
    if point is not None:
        assert s.satisfied_by(point)
