"""Primal and dual Steiner checks for a few catalog functions, with SVG charts.

    python3 scripts/steiner_demo.py [outdir]
"""

import sys
from pathlib import Path

from fivol import densities as D
from fivol import funcspace as F
from fivol.cli import steiner_svg
from fivol.steiner import dual_steiner_verify, steiner_verify

out = Path(sys.argv[1] if len(sys.argv) > 1 else "steiner_out")
out.mkdir(parents=True, exist_ok=True)
zeta = D.hat()
half_sq = F.RadialProfile((0.0,), ((0.0, 0.0, 0.5),))

jobs = [
    ("ut_half", lambda n: steiner_verify(F.CatalogUt(0.5), zeta, n)),
    ("ball", lambda n: steiner_verify(F.IndicatorBall(1.0), zeta, n)),
    ("half_square", lambda n: steiner_verify(half_sq, zeta, n)),
    ("vt_half_dual", lambda n: dual_steiner_verify(F.CatalogVt(0.5), zeta, n)),
    ("half_square_dual_quadratic", lambda n: dual_steiner_verify(half_sq, zeta, n, variant="quadratic")),
]
for name, job in jobs:
    for n in (2, 3):
        rep = job(n)
        (out / f"{name}_n{n}.svg").write_text(steiner_svg(rep, f"{name}, n = {n}"))
        print(f"{name:28s} n={n}  max coef err {rep.max_rel_error:.2e}  residual {rep.residual:.2e}")
