"""A short dead time where every certificate passes.

With h = 0.05 the stable controller from the second stage keeps the loop
stable and its sensitivity stays inside the deviation bound.
"""

import numpy as np

from hinfdelay import SynthesisConfig, synthesize

cfg = SynthesisConfig(delay_h=0.05, alpha=0.1, beta=0.2)
res = synthesize(cfg)
st = res.stability

print(f"gamma_opt = {res.stage1.gamma_opt:.10f}, gamma2_opt = {res.stage2.gamma2_opt:.10f}")
print(f"K poles in RHP: {st.k_rhp_poles}, closed-loop RHP zeros: {st.closed_loop_rhp_zeros}")
print(f"weighted deviation {st.achieved_deviation:.4f} <= bound {st.deviation_bound:.4f}")

# compare the achieved sensitivity with the optimal one
k = res.stage2.k_tf
s_ach = (1 + cfg.plant.plant_tf * k).invert()
w = np.geomspace(1e-2, 1e3, 7)
wt = cfg.weight.tf()
print("\n   omega     |W S_opt|   |W S_ach|")
for om, a, b in zip(w, np.abs(wt(1j * w) * res.stage1.s_opt(1j * w)), np.abs(wt(1j * w) * s_ach(1j * w))):
    print(f"{om:9.3g}   {a:9.5f}   {b:9.5f}")
print("\noverall:", "pass" if res.passed else "fail")
