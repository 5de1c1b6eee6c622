"""How the non-personalized scorers read a small rating matrix.

Run with ``python3 demos/01_scorers_by_hand.py``.
"""

import numpy as np

from elicitsim import nonpersonalized as npz
from elicitsim.dataset import SparseRatingMatrix

# Six users, five items, 0 = not rated.
#   item 0: everyone loves it           -> popular, no disagreement
#   item 1: half love it, half hate it  -> high variance and entropy
#   item 2: rated by two people only    -> obscure
#   item 3: spread over every value
#   item 4: nobody has rated it yet
R = np.array([
    [5, 5, 0, 1, 0],
    [5, 1, 4, 2, 0],
    [5, 5, 0, 3, 0],
    [4, 1, 0, 4, 0],
    [5, 5, 2, 5, 0],
    [5, 1, 0, 3, 0],
])
K = SparseRatingMatrix((u, i, int(r)) for (u, i), r in np.ndenumerate(R) if r)
stats = npz.ItemStats(K, pool=range(R.shape[1]), total_users=R.shape[0])

print("ratings per item :", stats.counts.tolist())
print("mean per item    :", np.round(stats.means, 2).tolist())
print()

names = ["popularity", "variance", "entropy", "entropy0", "co_coverage",
         "pop_entropy", "pop_variance", "helf"]
print(f"{'scorer':<14}" + "".join(f"{'item ' + str(i):>9}" for i in range(5)))
for name in names:
    s = npz.score(name, stats)
    print(f"{name:<14}" + "".join(f"{s[i]:9.3f}" for i in range(5)))
print()

# Each strategy asks for its highest-scoring items first.
for name in names:
    s = npz.score(name, stats)
    order = sorted(s, key=lambda i: (-s[i], i))
    print(f"{name:<14} asks for items in the order {order}")

# Popularity alone prefers item 0, which everyone agrees on and which
# therefore tells us little. Entropy alone prefers items 1 and 3, and
# pop_entropy balances the two signals.
