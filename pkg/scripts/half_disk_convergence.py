"""Mesh convergence of the mixed eigenpair on the unit half-disk.

Prints a CSV with the eigenvalue error against j_{0,1}^2, the observed order
between successive meshes, the relative flux spread and the contact-angle
defect.

    python3 scripts/half_disk_convergence.py [--h 0.1 0.05 0.025 0.0125]
"""

import argparse
import math

from extremal_domains.analytic_core import first_bessel_zero
from extremal_domains.fem import DomainSpec, mesh_domain, solve_first_eigenpair
from extremal_domains.shape_calculus import contact_angle, extremality_residual


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--h", type=float, nargs="+", default=[0.1, 0.05, 0.025, 0.0125])
    ap.add_argument("--grading", type=float, default=0.5)
    args = ap.parse_args()
    exact = first_bessel_zero(0.0) ** 2
    print("h,ndofs,lambda,abs_error,order,flux_std_rel,angle_defect")
    prev = None
    for h in args.h:
        pair = solve_first_eigenpair(mesh_domain(DomainSpec.half_disk(), h, args.grading))
        err = abs(pair.eigenvalue - exact)
        order = "" if prev is None else f"{math.log(prev[1] / err) / math.log(prev[0] / h):.3f}"
        ang = max(abs(a - math.pi / 2) for a in contact_angle(pair.mesh))
        std = extremality_residual(pair).scalar
        print(f"{h:g},{pair.space.ndofs},{pair.eigenvalue:.12f},{err:.3e},{order},{std:.3e},{ang:.2e}")
        prev = (h, err)


if __name__ == "__main__":
    main()
