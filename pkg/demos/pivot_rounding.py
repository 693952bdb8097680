"""Solve the relaxation and round it, three ways.

Generates a random labeled instance, solves the LP with lazy triangle
separation, then compares randomized pivot rounding, its empirical
distribution, the derandomized variant, and the exact optimum.
"""

import numpy as np

import ccpivot as cc

SEED = 20260808

inst = cc.gen_complete_random(9, 0.5, seed=SEED)
print(f"instance: complete, n = {inst.n}, "
      f"{int(np.sum(inst.labels == 1) // 2)} '+' pairs")

x, stats = cc.solve_relaxation(inst)
print(f"LP optimum {stats.objective:.4f} after {stats.separation_rounds} rounds, "
      f"{stats.constraints_generated} triangle cuts, {stats.iterations} pivots")

frac = int(np.sum((x.vec > 1e-9) & (x.vec < 1 - 1e-9)))
print(f"fractional variables: {frac} of {len(x.vec)}")

scheme = cc.get_scheme("complete206")

single, trace = cc.pivot_round(inst, x, scheme, seed=1)
print(f"\none randomized run: cost {cc.clustering_cost(inst, single):.1f} "
      f"in {len(trace.steps)} pivot steps")

mc = cc.monte_carlo_ratio(inst, x, scheme, trials=2000, seed=7)
print(f"2000 runs: mean {mc.mean:.4f} +- {mc.sem:.4f}, range "
      f"[{mc.min:.0f}, {mc.max:.0f}], mean/LP = {mc.ratio:.4f}")

derand = cc.derandomize_round(inst, x, scheme, alpha=2.06)
dcost = cc.clustering_cost(inst, derand)
print(f"derandomized: cost {dcost:.1f} <= 2.06 * LP = {2.06 * stats.objective:.4f}")

copt, opt = cc.brute_force_opt(inst)
print(f"exact optimum: {opt:.1f} ({copt.num_clusters} clusters)")
print(f"\nratios vs LP: mean {mc.mean / stats.objective:.3f}, "
      f"derand {dcost / stats.objective:.3f}, opt {opt / stats.objective:.3f}")

si = cc.step_inequality_check(inst, x, scheme, 2.06)
print(f"first-step inequality: {si.lhs:.4f} <= {si.rhs:.4f} ({si.holds})")
