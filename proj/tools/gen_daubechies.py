#!/usr/bin/env python3
"""Regenerate src/daubechies_taps.inc.

Extremal-phase Daubechies scaling filters by spectral factorization of
cos^{2N}(xi/2) P(sin^2(xi/2)) in 80-digit arithmetic. Taps are printed with
21 significant digits and normalized so that sum(h) = sqrt(2).
"""
import sys
import mpmath as mp

mp.mp.dps = 80


def daubechies(n):
    # P(y) = sum_k C(N-1+k, k) y^k, roots y_i -> z + 1/z = 2 - 4 y_i
    coeffs = [mp.binomial(n - 1 + k, k) for k in range(n)]
    poly = [mp.mpf(1)]  # coefficients in increasing powers of z
    for _ in range(n):
        poly = [a + b for a, b in zip(poly + [0], [0] + poly)]
    if n > 1:
        roots_y = mp.polyroots(list(reversed(coeffs)), maxsteps=500, extraprec=400)
        for y in roots_y:
            s = 2 - 4 * y
            disc = mp.sqrt(s * s - 4)
            z1, z2 = (s + disc) / 2, (s - disc) / 2
            z = z1 if abs(z1) > 1 else z2
            poly = [a - z * b for a, b in zip([0] + poly, poly + [0])]
    taps = [mp.re(c) for c in poly]
    total = sum(taps)
    return [t * mp.sqrt(2) / total for t in taps]


def main(out):
    lines = ["// Generated by tools/gen_daubechies.py. Do not edit.",
             "// Extremal-phase Daubechies scaling filters, N = 1..20.", ""]
    for n in range(1, 21):
        taps = daubechies(n)
        lines.append(f"static constexpr double kDaubechies{n}[{2 * n}] = {{")
        for t in taps:
            lines.append(f"    {mp.nstr(t, 21, min_fixed=-1, max_fixed=-1)},")
        lines.append("};")
    lines.append("")
    lines.append("static constexpr const double* kDaubechiesTable[21] = {")
    lines.append("    nullptr,")
    for n in range(1, 21):
        lines.append(f"    kDaubechies{n},")
    lines.append("};")
    with open(out, "w") as fh:
        fh.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/daubechies_taps.inc")
