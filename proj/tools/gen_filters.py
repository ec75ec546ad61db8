#!/usr/bin/env python3
"""Regenerates src/wavelets/filter_tables.inc.

Daubechies db2..db10 scaling filters are taken from PyWavelets (rec_lo).

The length-18 Fejer-Korovkin scaling filter is built in 60-digit arithmetic:
  1. lambda_k: normalized autocorrelation of u_j = sin((j+1)*pi/(n+2)), j = 0..n,
     which are the Fourier coefficients of the Fejer-Korovkin kernel K_n, n = 17.
  2. m(w) = (K_n * chi)(w), chi the indicator of |w| <= pi/2. Even harmonics of chi
     vanish, so m(w) + m(w + pi) = 1.
  3. m(pi) is cancelled by the minimum-norm odd-harmonic correction
     m += m(pi)/9 * sum_{k odd <= 17} cos(k w). Odd harmonics keep the
     power-complementary identity; the result stays positive away from pi and
     gains a double zero at pi (one vanishing moment).
  4. |H|^2 = 2 m is spectrally factorized: the double zero at z = -1 is divided
     out exactly, and the remaining roots inside the unit circle are kept.
"""
import sys

import mpmath as mp
import pywt

mp.mp.dps = 60


def fk_scaling_filter(length):
    n = length - 1
    u = [mp.sin((j + 1) * mp.pi / (n + 2)) for j in range(n + 1)]
    norm = mp.fsum(x * x for x in u)
    lam = [mp.fsum(u[j] * u[j + k] for j in range(n + 1 - k)) / norm for k in range(n + 1)]

    # two-sided cosine coefficients of m, index k in [-n, n]
    coef = {0: mp.mpf(1) / 2}
    for k in range(1, n + 1):
        chi_k = mp.sin(k * mp.pi / 2) / (k * mp.pi)
        coef[k] = coef[-k] = lam[k] * chi_k
    m_pi = mp.fsum(coef[k] * mp.cos(k * mp.pi) for k in range(-n, n + 1))
    odd = [k for k in range(1, n + 1) if k % 2 == 1]
    for k in odd:
        coef[k] += m_pi / len(odd) / 2
        coef[-k] = coef[k]

    # P(z) = z^n * sum_k coef_k z^k, descending powers for polyroots
    p = [coef[k] for k in range(n, -n - 1, -1)]
    # divide out (z + 1)^2 twice by synthetic division at z = -1
    for _ in range(2):
        q = [p[0]]
        for c in p[1:]:
            q.append(c - q[-1])
        remainder = q.pop()
        assert abs(remainder) < mp.mpf(10) ** -40, remainder
        p = q
    roots = mp.polyroots(p, maxsteps=500, extraprec=400)
    inside = [r for r in roots if abs(r) < 1]
    assert len(inside) == (len(p) - 1) // 2, len(inside)

    poly = [mp.mpc(1)]
    for r in inside + [mp.mpf(-1)]:
        nxt = [mp.mpc(0)] * (len(poly) + 1)
        for i, c in enumerate(poly):
            nxt[i] += c
            nxt[i + 1] -= c * r
        poly = nxt
    h = [mp.re(c) for c in poly]
    scale = mp.sqrt(2) / mp.fsum(h)
    h = [c * scale for c in h]

    for shift in range(0, length // 2):
        dot = mp.fsum(h[i] * h[i + 2 * shift] for i in range(length - 2 * shift))
        target = 1 if shift == 0 else 0
        assert abs(dot - target) < mp.mpf(10) ** -30, (shift, dot)
    return h


def emit(name, coeffs, out):
    out.write(f"inline constexpr std::array<double, {len(coeffs)}> {name} = {{\n")
    for c in coeffs:
        out.write(f"    {mp.nstr(c, 20, strip_zeros=False)},\n" if isinstance(c, mp.mpf)
                  else f"    {c!r},\n")
    out.write("};\n\n")


def main():
    out = sys.stdout
    out.write("// Generated by tools/gen_filters.py. Do not edit.\n\n")
    for order in range(2, 11):
        emit(f"kDb{order}", list(pywt.Wavelet(f"db{order}").rec_lo), out)
    emit("kFk18", fk_scaling_filter(18), out)


if __name__ == "__main__":
    main()
