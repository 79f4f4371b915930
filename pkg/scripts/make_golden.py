"""Regenerate data/golden_v1.txt from arbitrary-precision oracles.

Every value is computed with mpmath (Bessel zeros, Bessel functions and
adaptive quadrature), independently of the package's scipy-backed code.

    python scripts/make_golden.py [--check]
"""

import argparse
import sys
from pathlib import Path

import mpmath as mp

GOLDEN = Path(__file__).resolve().parents[1] / "src" / "extremal_domains" / "data" / "golden_v1.txt"
HEADER = "# golden_v1: d lambda1 dphi1 constant_C translation_constant\n"


def oracle_row(d, dps=30):
    mp.mp.dps = dps
    n = d - 1
    nu = mp.mpf(d) / 2 - 1
    k = mp.besseljzero(nu, 1)
    area = mp.pi ** (mp.mpf(d) / 2) / mp.gamma(mp.mpf(d) / 2)
    prof = lambda r: r ** (-nu) * mp.besselj(nu, k * r) if r > 0 else (k / 2) ** nu / mp.gamma(nu + 1)
    norm2 = area * mp.quad(lambda r: prof(r) ** 2 * r ** n, [0, 1])
    c = 1 / mp.sqrt(norm2)
    dphi = lambda r: c * mp.diff(prof, r)
    dphi1 = -c * k * mp.besselj(nu + 1, k)
    moment = mp.gamma(1) * mp.gamma(mp.mpf(3) / 2) * mp.gamma(mp.mpf(1) / 2) ** (n - 1) / mp.gamma(mp.mpf(n + 4) / 2)
    i1 = mp.quad(lambda r: dphi(r) ** 2 * r ** (n + 1), [0, 1])
    i2 = mp.quad(lambda r: (c * prof(r)) ** 2 * r ** (n + 1), [0, 1])
    C = -2 * moment * area * i1 / dphi1
    m0 = mp.gamma(1) * mp.gamma(mp.mpf(1) / 2) ** n / mp.gamma(mp.mpf(n + 2) / 2)
    vol = area / d
    lam = k**2
    c1 = 2 * moment * i1 - m0 * (i1 - lam * i2) - 2 * lam * m0 / ((n + 1) * (n + 2) * vol)
    return [d, float(lam), float(dphi1), float(C), float(-c1 / (2 * dphi1))]


def render(dims=(2, 3, 4)):
    lines = [HEADER]
    for d in dims:
        row = oracle_row(d)
        lines.append(f"{row[0]} " + " ".join(f"{v:.15e}" for v in row[1:]) + "\n")
    return "".join(lines)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true", help="compare with the stored table instead of writing")
    args = ap.parse_args(argv)
    text = render()
    if args.check:
        same = GOLDEN.read_text() == text
        print("golden table up to date" if same else "golden table differs")
        return 0 if same else 1
    GOLDEN.write_text(text)
    print(text, end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
