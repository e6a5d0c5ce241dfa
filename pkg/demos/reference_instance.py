"""Walk through the full synthesis on the unit-delay reference problem.

Run with ``python3 demos/reference_instance.py``.  The first stage and the
envelope certify; the stable controller produced by the second stage does not
stabilize this plant, and the certificates say so.
"""

import numpy as np

from hinfdelay import SynthesisConfig, synthesize

cfg = SynthesisConfig(delay_h=1.0, alpha=0.1, beta=0.2)
res = synthesize(cfg)

r1 = res.stage1
print(f"gamma_opt   = {r1.gamma_opt:.10f}")
print(f"omega_gamma = {r1.omega_gamma:.6f}")

# |W S_opt| is flat at gamma_opt along the axis
w = np.geomspace(1e-2, 1e3, 400)
flat = np.abs(cfg.weight.tf()(1j * w) * r1.s_opt(1j * w))
print(f"|W S_opt| range on [1e-2, 1e3]: [{flat.min():.10f}, {flat.max():.10f}]")

env = res.envelope
print(f"envelope: kappa = {env.kappa:.6f}, alpha1 = {env.alpha1:.4f}, beta1 = {env.beta1:.6f}")

r2 = res.stage2
print(f"gamma2_opt  = {r2.gamma2_opt:.10f}  at omega* = {r2.omega_star:.4f}")

st = res.stability
print(f"K unstable poles       : {st.k_rhp_poles}")
print(f"closed-loop RHP zeros  : {st.closed_loop_rhp_zeros}"
      + (" plus a neutral chain" if st.closed_loop_neutral_chain else ""))
print(f"sufficient-condition margin: {st.suff_cond_margin:.4f}")

print("\ncertificates:")
for name, c in res.certificates.items():
    print(f"  {name:20s} {c.status}")
print("overall:", "pass" if res.passed else "fail")
