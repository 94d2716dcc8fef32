#!/usr/bin/env python3
"""Reference ARAR forecasts, frozen into tests/data/arar_reference.json.

A line-by-line NumPy port of the `arar` routine from the R package itsmr
(the companion code of Brockwell and Davis' time-series textbook). It is
kept literal, with dense solves and explicit polynomial convolution, and
shares no code with the C++ implementation.

Usage: arar_reference.py [output.json]
"""

import json
import sys

import numpy as np


def acvf(x, h):
    x = np.asarray(x, dtype=float)
    n = len(x)
    xbar = x.mean()
    return np.array([np.sum((x[: n - k] - xbar) * (x[k:] - xbar)) / n for k in range(h + 1)])


def arar(y, h):
    y = np.asarray(y, dtype=float).copy()
    Y = y.copy()
    n = len(y)
    psi = np.array([1.0])

    for _ in range(3):
        A = np.zeros((15, 2))
        for tau in range(1, 16):
            x = y[tau:n]
            z = y[0 : n - tau]
            phi = np.sum(x * z) / np.sum(z * z)
            A[tau - 1, 0] = np.sum((x - phi * z) ** 2) / np.sum(x * x)
            A[tau - 1, 1] = phi
        tau = int(np.argmin(A[:, 0])) + 1
        err = A[tau - 1, 0]
        phi = A[tau - 1, 1]
        if err <= 8.0 / n or (phi >= 0.93 and tau > 2):
            y = y[tau:n] - phi * y[0 : n - tau]
            psi = np.concatenate([psi, np.zeros(tau)]) - phi * np.concatenate([np.zeros(tau), psi])
        elif phi >= 0.93:
            M = np.zeros((2, 2))
            M[0, 0] = np.sum(y[1 : n - 1] ** 2)
            M[0, 1] = M[1, 0] = np.sum(y[0 : n - 2] * y[1 : n - 1])
            M[1, 1] = np.sum(y[0 : n - 2] ** 2)
            b = np.array([np.sum(y[2:n] * y[1 : n - 1]), np.sum(y[2:n] * y[0 : n - 2])])
            phi2 = np.linalg.solve(M, b)
            y = y[2:n] - phi2[0] * y[1 : n - 1] - phi2[1] * y[0 : n - 2]
            psi = (
                np.concatenate([psi, [0.0, 0.0]])
                - phi2[0] * np.concatenate([[0.0], psi, [0.0]])
                - phi2[1] * np.concatenate([[0.0, 0.0], psi])
            )
        else:
            break
        n = len(y)

    S = y
    Sbar = S.mean()
    X = S - Sbar
    m = 26
    gamma = acvf(X, m)  # gamma[k] is lag k

    best = None
    sigma2 = np.inf
    for i in range(2, m - 1):
        for j in range(i + 1, m):
            for k in range(j + 1, m + 1):
                lags = [1, i, j, k]
                A = np.array([[gamma[abs(a - b)] for b in lags] for a in lags])
                b = np.array([gamma[a] for a in lags])
                phi = np.linalg.solve(A, b)
                s = gamma[0] - phi @ b
                if s < sigma2:
                    sigma2 = s
                    best = (lags, phi)
    lags, phi = best

    # xi(B) = psi(B) * phi(B), phi(B) = 1 - sum phi_a B^{lag_a}
    phipoly = np.zeros(lags[3] + 1)
    phipoly[0] = 1.0
    for lag, coef in zip(lags, phi):
        phipoly[lag] -= coef
    xi = np.convolve(psi, phipoly)
    c = (1.0 - np.sum(phi)) * Sbar

    k = len(xi)
    n = len(Y)
    ext = np.concatenate([Y, np.zeros(h)])
    for t in range(n, n + h):
        ext[t] = c - sum(xi[j] * ext[t - j] for j in range(1, k))
    return {
        "psi": psi[1:].tolist(),
        "lags": lags,
        "phi": phi.tolist(),
        "xi": xi[1:].tolist(),
        "s_bar": float(Sbar),
        "sigma2": float(sigma2),
        "forecast": ext[n:].tolist(),
    }


def series():
    rng = np.random.default_rng(20240611)
    n = 240
    out = {}
    e = rng.standard_normal(n + 100)
    x = np.zeros(n + 100)
    for t in range(1, n + 100):
        x[t] = 0.5 * x[t - 1] + e[t]
    out["short_memory"] = (10.0 + x[100:]).tolist()
    out["random_walk"] = (50.0 + np.cumsum(rng.standard_normal(n))).tolist()
    t = np.arange(n)
    out["linear_trend"] = (5.0 + 0.3 * t + rng.standard_normal(n)).tolist()
    return out


def main():
    path = sys.argv[1] if len(sys.argv) > 1 else "arar_reference.json"
    h = 12
    cases = []
    for name, y in series().items():
        fit = arar(y, h)
        cases.append({"name": name, "horizon": h, "series": y, **fit})
    with open(path, "w") as f:
        json.dump({"cases": cases}, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
