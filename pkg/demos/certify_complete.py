"""Certify rounding schemes on complete graphs.

Sweeps the per-triangle surplus of a scheme over tight triangles and
corner cases at several target ratios, showing where certification
starts to fail.
"""

import time

import ccpivot as cc

scheme = cc.get_scheme("complete206")

print("scheme: complete206 (quadratic ramp on '+', identity on '-')")
print(f"eligibility: {cc.check_eligibility(scheme)}")
print()

for alpha in (2.5, 2.06, 2.03, 2.0):
    t0 = time.time()
    rep = cc.certify(scheme, alpha, "complete", grid_step=0.005, tol=1e-9)
    verdict = "PASS" if rep.passed else "FAIL"
    print(f"alpha = {alpha:<5} -> {verdict}  (min surplus {rep.min_surplus:+.5f}, "
          f"{time.time() - t0:.2f}s)")
    if not rep.passed:
        w = rep.worst()
        print(f"            worst triangle: types {w.witness['types']} "
              f"lengths {[round(v, 3) for v in w.witness['lengths']]}")
print()

# the linear baseline certifies a weaker ratio
acn = cc.get_scheme("acn_linear")
for alpha in (3.0, 2.5, 2.4):
    rep = cc.certify(acn, alpha, "complete", grid_step=0.005)
    print(f"acn_linear @ {alpha}: {'PASS' if rep.passed else 'FAIL'} "
          f"(min surplus {rep.min_surplus:+.5f})")
print()

rep = cc.certify(cc.get_scheme("kpartite3"), 3.0, "kpartite", grid_step=0.005)
print(f"kpartite3 @ 3.0 over {len(rep.results)} triangle types: "
      f"{'PASS' if rep.passed else 'FAIL'}")
for r in rep.results:
    print(f"   type {r.label}: min surplus {r.passed_at:+.5f}")
