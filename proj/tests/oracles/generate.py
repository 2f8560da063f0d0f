"""Independent reference values for the C++ tests.

Uses scipy/numpy only; nothing here shares code with the library.
Run: python3 tests/oracles/generate.py > tests/oracles/frozen.hpp
"""
import numpy as np
from scipy.integrate import solve_ivp


def moments(ratio, t_end, mu=1.0, hbar=1.0, sigma0=1.0):
    M = ratio * mu

    def rhs(_, y):
        s, b = y
        return [2 * hbar * b * s / M,
                0.5 * hbar * (1 / mu - 1 / M) * (4 * b * b - 1 / (4 * s ** 4))]

    sol = solve_ivp(rhs, (0, t_end), [sigma0, 0.0], method="DOP853",
                    rtol=1e-13, atol=1e-15, dense_output=True)
    return sol


def fringe(x, inten, length):
    total = inten.sum()
    centroid = (inten * x).sum() / total
    half = 0.25 * length
    n = len(x)
    inside = lambda i: 0 < i < n - 1 and abs(x[i]) < half
    cands = [i for i in range(1, n - 1)
             if inside(i) and inten[i] > inten[i - 1] and inten[i] >= inten[i + 1]]
    best = min(cands, key=lambda i: abs(x[i] - centroid))
    lo = hi = best
    while lo > 0 and inten[lo - 1] < inten[lo]:
        lo -= 1
    while hi < n - 1 and inten[hi + 1] < inten[hi]:
        hi += 1
    imin = 0.5 * (inten[lo] + inten[hi])
    return (inten[best] - imin) / (inten[best] + imin)


def linear_gaussian(x, t, sigma0, x0, mass=1.0, hbar=1.0):
    # free spreading of exp(-(x-x0)^2/(4 sigma0^2)), unnormalized
    st = sigma0 * (1 + 1j * hbar * t / (2 * mass * sigma0 ** 2))
    return np.exp(-(x - x0) ** 2 / (4 * sigma0 * st)) / np.sqrt(st)


def main():
    out = ["#pragma once", "", "// Generated by tests/oracles/generate.py. Do not edit.", "",
           "namespace frozen {", ""]

    out.append("// sigma(t) of the moment equations, mu = hbar = sigma0 = 1, b0 = 0.")
    out.append("struct MomentSample { double ratio, t, sigma, b; };")
    out.append("inline constexpr MomentSample kMoments[] = {")
    for ratio, times in [(0.25, [0.25, 0.5]), (0.5, [0.5, 1.0]), (1.0, [1.0]),
                         (2.0, [0.5, 1.0, 2.0]), (4.0, [0.5, 1.0, 2.0])]:
        sol = moments(ratio, max(times))
        for t in times:
            s, b = sol.sol(t)
            out.append(f"    {{{ratio!r}, {t!r}, {s:.17g}, {b:.17g}}},")
    out.append("};")
    out.append("")

    # Two slits, width sigma = 1, separation 6, screen at t = 10, n = 1024, L = 128.
    n, length = 1024, 128.0
    x = -length / 2 + np.arange(n) * (length / n)
    psi = linear_gaussian(x, 10.0, 1.0, -3.0) + linear_gaussian(x, 10.0, 1.0, 3.0)
    v = fringe(x, np.abs(psi) ** 2, length)
    out.append("// Central-fringe visibility of the linear two-slit screen.")
    out.append(f"inline constexpr double kSlitVisibility = {v:.17g};")
    width = np.sqrt((np.abs(psi) ** 2 * x ** 2).sum() / (np.abs(psi) ** 2).sum())
    out.append(f"inline constexpr double kSlitEnvelopeWidth = {width:.17g};")
    out.append("")

    out.append("}  // namespace frozen")
    print("\n".join(out))


if __name__ == "__main__":
    main()
