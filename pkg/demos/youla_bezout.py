"""Coprime factors, a Bezout pair and the Youla family for a delayed
non-minimum-phase plant P = e^{-s} (1 - s)/(1 + s).
"""

import numpy as np

from hinfdelay import DelayTransferFunction as TF
from hinfdelay import coprime_factorization, parameterize_controller, solve_bezout
from hinfdelay.youla import closed_loop_maps

m = TF.delay(1.0)
n_inner = TF.rational((1.0, -1.0), (1.0, 1.0))
fact = coprime_factorization(m, n_inner)
bez = solve_bezout(fact)
print("RHP zeros of N:", fact.rhp_zeros)
print(f"Y(1) = {complex(bez.y_tf(1.0)).real:.6f}  (1/M(1) = e = {np.e:.6f})")
print(f"sup |N X + M Y - 1| on the grid: {bez.residual_sup:.2e}")

# every stable Q gives an internally stable loop; check the sensitivity formula
s = 1j * np.geomspace(1e-2, 1e2, 200)
for q in (TF.constant(0.0), TF.rational((0.5,), (1.0, 1.0)), TF.rational((-1.0, 2.0), (3.0, 1.0))):
    c = parameterize_controller(fact, bez, q)
    sens, _ = closed_loop_maps(fact, bez, q, s)
    direct = 1 / (1 + fact.plant(s) * c(s))
    print(f"Q(0) = {complex(q(0.0)).real:+.3f}: max |S - M (Y - N Q)| = {np.max(np.abs(direct - sens)):.1e}")
