"""Average-case algorithms with planted success profiles, and the random threshold.

Run: python3 demos/07_average_case_profiles.py
"""
from qlinred.avgcase import (
    band_success_fraction,
    check_band,
    generate_instance,
    make_threshold,
    threshold_set,
    verify_density,
)

inst = generate_instance("footnote-adversary", 4)
prof = inst.success_profile()
print(f"{inst.instance_id}: mean success {prof.mean}")
rep = verify_density(prof, 0.5)
print(f"every X_kappa with kappa <= 1/4 has density >= 1/4: {rep.holds} (smallest {rep.min_density})")
alg = inst.planted()
print(f"planted unitary defect {alg.unitarity_defect():.1e}")
print("inputs the algorithm gets right:", threshold_set(prof, 0.5).nonzero()[0].tolist())

spread = generate_instance("spread", 6, seed=0).success_profile()
a = spread.mean
for r in (1, 4, 8):
    b = check_band(spread, make_threshold(a, r, 8))
    print(f"r = {r}: tau = {b.tp.tau:.4f}, band density {b.gap:.4f} <= 2/K = {b.bound}: {b.within}, "
          f"Fourier gap {b.fourier_gap:.4f}")
print("fraction of good r:", band_success_fraction(spread, a, K=8))
