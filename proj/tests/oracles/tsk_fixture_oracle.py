"""Independent recomputation of the 2-input, 4-rule fixture used in test_fuzzy.cpp.

Plain Python floats, written from the inference formula without sharing any
code with the C++ library. Run: python3 tests/oracles/tsk_fixture_oracle.py
"""
import math

mfs = [
    [(0.2, 0.3), (0.8, 0.25)],
    [(0.1, 0.4), (0.7, 0.2)],
]
rules = [
    ((0, 0), (0.1, 0.5, -0.3)),
    ((0, 1), (0.9, -0.2, 0.4)),
    ((1, 0), (-0.4, 1.1, 0.2)),
    ((1, 1), (0.3, 0.0, -0.7)),
]
x = (0.35, 0.6)


def gauss(c, s, v):
    return math.exp(-((v - c) ** 2) / (2 * s * s))


w = []
for idx, _ in rules:
    p = 1.0
    for i, j in enumerate(idx):
        c, s = mfs[i][j]
        p *= gauss(c, s, x[i])
    w.append(p)

num = sum(wr * (a[0] + a[1] * x[0] + a[2] * x[1]) for wr, (_, a) in zip(w, rules))
y = num / sum(w)

print("firing strengths:", ", ".join(repr(v) for v in w))
print("y:", repr(y))
print("objective at t_d=0:", repr(y * y))
