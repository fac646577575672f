"""beta for phi o h_B: integral-equation check and the blow-up detector.

    python3 scripts/phi_demo.py
"""

from fivol import densities as D
from fivol.steiner import PhiProfile, general_phi_beta_solve

alpha = D.piecewise_polynomial([0, 1], [[1, 0, -1]])
rising = D.piecewise_polynomial([0, 1], [[0, 1, -1]])

for coeffs in ([0, 1], [0, 0, 0.5], [0, 1, 1], [0, 2, 0, 1]):
    phi = PhiProfile.polynomial(coeffs)
    for j, n in ((1, 2), (1, 3), (2, 3)):
        sol = general_phi_beta_solve(alpha, phi, j, n)
        err, ok = sol.validate()
        kind = "exact" if sol.density is not None else "quadrature"
        print(f"phi={coeffs!s:14s} j={j} n={n}  {kind:10s} max err {err:.2e}  ok={ok}")

for a, label in ((rising, "alpha = s(1-s)"), (alpha, "alpha = 1-s^2")):
    sol = general_phi_beta_solve(a, PhiProfile.polynomial([0, 0, 0.5]), 1, 2)
    incs = ", ".join(f"{x:.3g}" for x in sol.decade_increments)
    print(f"phi = t^2/2, {label}: diverges_at_zero={sol.diverges_at_zero}  decade increments [{incs}]")
