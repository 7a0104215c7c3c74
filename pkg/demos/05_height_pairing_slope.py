"""The height pairing, its log slope, and the pseudoinverse prediction.

Sweeping the pairing over L and fitting an affine law in log|s|^2 = -2L
recovers the intersection-matrix constant to many digits; the base-changed
family reproduces the same numbers with the slope rescaled by the degree.
"""

import numpy as np

from pinchlab import (
    FamilyConfig,
    base_change_consistency,
    build_chain,
    cycle_graph,
    density_from_callable,
    density_from_spec,
    fit_log_asymptote,
    holder_probe,
    neck_wave_profile,
    pairing_sweep,
    predicted_constant,
    step_density_spec,
)

cfg = FamilyConfig(n_components=2)
spec = step_density_spec([2.0, -2.0])
builder = lambda chain: density_from_spec(spec, chain)

print("== I_2 hand case ==")
curve = pairing_sweep(cfg, builder, builder, np.geomspace(50, 200, 10),
                      resolution=48)
fit = fit_log_asymptote(curve)
chain = build_chain(cfg, 200.0, resolution=48)
pred = predicted_constant(cycle_graph(cfg.area_vector()),
                          builder(chain), builder(chain))
print(f"c_fit      = {fit.c_fit:+.12f}")
print(f"c_predicted= {pred:+.12f}")
print(f"intercept  = {fit.intercept:+.6f}, residual rms = {fit.residual_rms:.2e}")

print("\n== base change s = t^3 ==")
rep = base_change_consistency(cfg, 3, [20.0, 30.0, 45.0, 65.0],
                              builder, builder, resolution=32)
print(f"reparametrization discrepancy: {rep.max_discrepancy:.2e}")
print(f"slope in t = {rep.slope_in_t:+.6f} = {rep.degree} x slope in s "
      f"({rep.slope_in_s:+.6f})")

print("\n== a pair that never blows up: neck-supported waves ==")
nb = lambda chain: density_from_callable(neck_wave_profile(chain, 0), chain)
curve = pairing_sweep(cfg, nb, nb, np.geomspace(25, 200, 9), resolution=32)
probe = holder_probe(curve)
print("values * L:", np.round(curve.values * curve.L, 4))
print(f"decay family: {probe.best_family}, power exponent "
      f"{probe.power_exponent:.3f}, limit {probe.limit_estimate:+.2e}")
