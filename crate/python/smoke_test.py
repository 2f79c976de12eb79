"""Smoke test for the pybalpair extension module."""

import math
from fractions import Fraction

import pybalpair as bp

golden = bp.MatrixPair([[1, 0], [1, 1]], [["1", "1"], ["0", "1"]])
assert golden.classify() == "parabolic_pair"
assert golden.trace("0101") == "7" and golden.trace("0011") == "6"

chi = golden.chi("1/2")
assert abs(chi - math.log((3 + math.sqrt(5)) / 2) / 2) < 1e-12, chi

solve = golden.maximize_slope(100)
assert solve["tau"] == "1/2", solve

jsr = golden.jsr_bounds(8)
assert abs(jsr["lower"] - (1 + math.sqrt(5)) / 2) < 1e-12
assert jsr["argmax_word"] == "01"

table = golden.trace_argmax(2, 4)
assert table["maximizers"] == ["0101", "1010"]

ident = bp.trace_identity_check([[1, 0], [1, 1]], [[1, 1], [0, 1]], 1, 1, 0)
assert (ident["eta"], ident["t1"], ident["delta"]) == ("1", "6", "1")

assert bp.christoffel_cycle("2/5") == "00101"
assert bp.is_balanced("0101") and not bp.is_balanced("0011")
assert bp.unbalance_witness("0011") == ""

pair = bp.random_balanced_pair(7)
assert pair.classify() in {"co_parallel", "mixed", "parabolic_pair"}
assert bp.MatrixPair.from_json(pair.to_json()) == pair

scaled = bp.MatrixPair([[Fraction(1, 2), 0], [Fraction(1, 2), Fraction(1, 2)]], [[1, 1], [0, 1]])
assert scaled.classify() == "parabolic_pair"

records = bp.sweep_family(golden, [0.5, 1.0, 2.0], 100)
assert records[1]["tau"] == "1/2"

try:
    bp.MatrixPair([[0, 0], [0, 0]], [[1, 0], [0, 1]])
except ValueError:
    pass
else:
    raise AssertionError("singular matrix accepted")

print("pybalpair smoke test passed")
