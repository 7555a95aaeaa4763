"""Lock amounts and fee coefficients across bidder counts.

Prints, for each distribution, the published lock bound, its large-n
approximation, the lock at which a single fake bid actually stops paying,
and the fee coefficient alpha = 2 (E[B1] - E[B2]) / E[B2].

    python demos/lock_and_fee.py
"""

from auction_lab import Exponential, LogNormal, Uniform, break_even_lock, fee_alpha, hazard_ratio_sup
from auction_lab import lock_bound_asymptotic, lock_bound_exact
from auction_lab.errors import UnboundedHazard

for dist in (Uniform(0.0, 1.0), Exponential(1.0), LogNormal(0.0, 1.0)):
    sup_m = hazard_ratio_sup(dist)
    print(f"\n{dist!r}: sup of (1-F)/f = {sup_m:.6g}")
    print(f"{'n':>4}  {'L_exact':>10}  {'L_asympt':>10}  {'break_even':>10}  {'alpha':>8}")
    for n in (2, 5, 10, 21, 51):
        fee = fee_alpha(dist, n).alpha
        exact = lock_bound_exact(dist, n).L_exact
        try:
            asym = f"{lock_bound_asymptotic(dist, n):10.6f}"
        except UnboundedHazard:
            asym = f"{'unbounded':>10}"
        even = break_even_lock(dist, n).value
        print(f"{n:>4}  {exact:10.6f}  {asym}  {even:10.6f}  {fee:8.5f}")

print("\nL_exact shrinks like sup(m)/n, but a single fake bid keeps paying until the lock")
print("reaches break_even, which stays near sup(m) for every n.")
