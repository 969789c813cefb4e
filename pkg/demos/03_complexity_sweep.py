"""How the bit count grows with n, with and without the consensus bits."""

import numpy as np

from coolba.cli import execute, sweep_schedule
from coolba.metrics import bound_constants, estimate_exponent

for alpha in (0.0, 1.0, 1.5):
    ns = [31, 61, 121, 241] if alpha > 1 else [16, 31, 61, 121]
    recs = [execute("ba", n, t, ell, "random", "all-equal", 0)
            for n, t, ell in sweep_schedule(ns, alpha, 1.0)]
    est = estimate_exponent(recs, alpha, 1.0)
    _, spread = bound_constants(recs)
    print(f"alpha={alpha}: target {max(1 + alpha, 2.0):.2f}, "
          f"slope {est.beta_hat:.3f} without consensus bits, {est.beta_hat_with_obc:.3f} with")
    print(f"  constant K varies by {spread:.2f}x across n = {ns}")
    table = np.array([[r.n, r.t, r.ell, r.total_excl_obc, r.bits['obc_bits']] for r in recs])
    print("  n, t, l, bits excl. consensus, consensus bits")
    print(table)
