#!/usr/bin/env python3
"""Regenerates data/manipulator.json.

Flexible-joint robot manipulator with static output feedback: minimize the
closed-loop H-infinity level gamma subject to

    X > 0,
    -[ A_F' X + X A_F   X B F1   C1' ]
     [      *             -g     D11 ] > 0,      A_F = A + B F C,
     [      *             *      -g  ]
    gamma > 0,

written entry-wise as expression strings in the six uncertain physical
parameters (each +/-15% around its nominal). The Lyapunov matrix X (4x4
symmetric) and gamma form the x-group; the two output-feedback gains F1, F2
form the y-group, entering bilinearly through X.
"""

import json
import os

# state-space model, entries as expression strings over the parameters
A = [
    ["0", "1", "0", "0"],
    ["0", "0", "c/(M^2*I_m)", "0"],
    ["0", "0", "0", "1"],
    ["0", "-beta/I_son", "-c/(M^2*I_m)-c/I_son", "-beta/I_son"],
]
B = ["0", "L_t/(M*I_m)", "0", "-(L_t/(M*I_m))"]
C = [
    ["0", "M", "0", "0"],
    ["1", "0", "1", "0"],
]
C1 = ["1", "0", "1", "0"]
D11 = "1"
# disturbance enters through the measurement only: B1 = 0, D12 = 0

NOMINALS = {
    "M": -260.6,      # gearbox ratio
    "L_t": 0.6,       # motor torque constant
    "beta": 0.4,      # damping coefficient
    "I_m": 0.001,     # input axis inertia
    "I_son": 400.0,   # output system inertia
    "c": 130.0,       # spring constant
}
SPREAD = 0.15


def neg(s):
    if s == "0":
        return "0"
    return "-(" + s + ")"


def add(*terms):
    parts = [t for t in terms if t != "0"]
    if not parts:
        return "0"
    out = parts[0]
    for t in parts[1:]:
        if t.startswith("-"):
            out += t
        else:
            out += "+" + t
    return out


def mul(a, b):
    if a == "0" or b == "0":
        return "0"
    if a == "1":
        return b
    if b == "1":
        return a
    return "(" + a + ")*(" + b + ")"


def lyap_coeff(S, k, l, i, j):
    """Entry (i,j) of S^T E_kl + E_kl S for the symmetric basis matrix E_kl."""
    terms = []
    if k == l:
        if j == k:
            terms.append(S[k][i])
        if i == k:
            terms.append(S[k][j])
    else:
        if j == l:
            terms.append(S[k][i])
        if j == k:
            terms.append(S[l][i])
        if i == k:
            terms.append(S[l][j])
        if i == l:
            terms.append(S[k][j])
    return add(*terms)


def grid_set(grid, i, j, expr):
    if expr != "0":
        grid[f"{i},{j}"] = expr


def main():
    params = []
    for name, nominal in NOMINALS.items():
        lo = nominal * (1.0 - SPREAD)
        hi = nominal * (1.0 + SPREAD)
        if lo > hi:
            lo, hi = hi, lo
        params.append({"name": name, "nominal": nominal, "lower": lo, "upper": hi})

    x_entries = [(k, l) for k in range(4) for l in range(k, 4)]

    # block 1: X > 0
    lyap_block = {
        "name": "lyapunov",
        "dim": 4,
        "strict": True,
        "linear": {},
    }
    for k, l in x_entries:
        lyap_block["linear"][f"X[{k},{l}]"] = {f"{k},{l}": "1"}

    # block 2: negated bounded-real-lemma matrix, 6x6
    hinf = {"name": "hinf", "dim": 6, "strict": True, "constant": {}, "linear": {},
            "bilinear": {}}
    grid_set(hinf["constant"], 0, 5, neg(C1[0]))
    grid_set(hinf["constant"], 1, 5, neg(C1[1]))
    grid_set(hinf["constant"], 2, 5, neg(C1[2]))
    grid_set(hinf["constant"], 3, 5, neg(C1[3]))
    grid_set(hinf["constant"], 4, 5, neg(D11))
    hinf["linear"]["gamma"] = {"4,4": "1", "5,5": "1"}

    # affine X terms: -(A' E_kl + E_kl A) on the state corner
    for k, l in x_entries:
        grid = {}
        for i in range(4):
            for j in range(i, 4):
                grid_set(grid, i, j, neg(lyap_coeff(A, k, l, i, j)))
        if grid:
            hinf["linear"][f"X[{k},{l}]"] = grid

    # bilinear X*F terms: the Lyapunov corner sees B F C, the disturbance
    # column sees X B (F D21 = F1)
    for r, fname in enumerate(["F1", "F2"]):
        N = [[mul(B[m], C[r][j]) for j in range(4)] for m in range(4)]
        for k, l in x_entries:
            grid = {}
            for i in range(4):
                for j in range(i, 4):
                    grid_set(grid, i, j, neg(lyap_coeff(N, k, l, i, j)))
            if fname == "F1":
                for i in range(4):
                    # (E_kl B)_i
                    terms = []
                    if k == l:
                        if i == k:
                            terms.append(B[k])
                    else:
                        if i == k:
                            terms.append(B[l])
                        if i == l:
                            terms.append(B[k])
                    grid_set(grid, i, 4, neg(add(*terms)))
            if grid:
                hinf["bilinear"][f"X[{k},{l}] * {fname}"] = grid

    gamma_block = {
        "name": "gamma_positive",
        "dim": 1,
        "strict": True,
        "linear": {"gamma": {"0,0": "1"}},
    }

    problem = {
        "name": "manipulator-sof-hinf",
        "parameters": params,
        "variables": [
            {"name": "X", "kind": "matrix", "dim": 4, "group": "x"},
            {"name": "gamma", "kind": "scalar", "group": "x"},
            {"name": "F1", "kind": "scalar", "group": "y"},
            {"name": "F2", "kind": "scalar", "group": "y"},
        ],
        "objective": {"gamma": 1.0},
        "blocks": [lyap_block, hinf, gamma_block],
    }

    out = os.path.join(os.path.dirname(__file__), "..", "data", "manipulator.json")
    with open(out, "w") as f:
        json.dump(problem, f, indent=2)
        f.write("\n")
    print("wrote", os.path.normpath(out))


if __name__ == "__main__":
    main()
