"""Buy-back-and-relist: why the fee exists.

The seller wins its own auction with an unbeatable fake bid, paying B1 to
itself, then relists and plants a fake bid just below B1 so the honest
winner pays almost B1 instead of B2. The fee charged on both rounds has to
eat the extra revenue.

    python demos/repeated_auction.py
"""

from auction_lab import Uniform, fee_alpha, repeated_auction_check, repeated_auction_utility

dist, reps = Uniform(0.0, 1.0), 10_000
print(f"{'n':>3}  {'alpha':>7}  {'honest':>8}  {'attack':>8}  {'gain':>9}  {'+/-':>7}")
for n in (5, 11, 21):
    for alpha in (0.0, fee_alpha(dist, n).alpha):
        r = repeated_auction_utility(dist, n, alpha, 1e-6, reps, seed=n)
        print(f"{n:>3}  {alpha:7.4f}  {r.honest_mean:8.5f}  {r.attack_mean:8.5f}  {-r.diff_mean:+9.5f}  {r.diff_ci:7.5f}")

print("\nper-instance check (does relisting lose?) with alpha = 0.1:")
for b1, b2 in ((1.0, 0.9), (1.0, 0.8), (1.0, 0.5)):
    print(f"  B1={b1} B2={b2}: attack unprofitable = {repeated_auction_check(b1, b2, 0.1)}")
