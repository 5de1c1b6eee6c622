"""Free ratings: copy each elicited rating onto the most similar item.

The planted data comes with genre/actor tokens that follow the hidden item
factors, so similar items really do get similar ratings. We run the
adaptive hybrid three ways and look at a few inferred ratings.

Run with ``python3 demos/03_free_ratings.py``.
"""

from collections import Counter

from elicitsim import dataset, simulator
from elicitsim.simulator import SimulationConfig

SEED = 2

triples, Q = dataset.synthetic_ratings(n_users=50, n_items=200, density=0.5, seed=SEED)
features = dataset.synthetic_features(Q, seed=SEED)
split = dataset.split(triples, 1, 15, seed=SEED)
print(f"feature dimension {features.dim}, blocks {features.blocks}")

runs = {}
for mode in ("off", "features", "features+embeddings"):
    config = SimulationConfig(total_iter=8, batch_size=5, free_mode=mode, master_seed=SEED)
    runs[mode] = simulator.run(config, split, features)

print("\niter" + "".join(f"{m:>22}" for m in runs))
for it in range(9):
    print(f"{it:>4}" + "".join(f"{r.maes[it]:22.4f}" for r in runs.values()))

events = runs["features+embeddings"].events
print(f"\n{len(events)} free ratings inferred, status counts {dict(Counter(e.status for e in events))}")

# How often did the copied rating match what the user actually gave?
truth = {(t.user, t.item): t.rating for t in triples}
known = [e for e in events if (e.user, e.target) in truth]
exact = sum(truth[e.user, e.target] == e.rating for e in known)
off_by_one = sum(abs(truth[e.user, e.target] - e.rating) <= 1 for e in known)
print(f"{len(known)} targets have a real rating: {exact} exact, {off_by_one} within one star")

print("\nfirst few events:")
for e in events[:5]:
    real = truth.get((e.user, e.target), "-")
    print(f"  round {e.iteration} user {e.user}: item {e.source} -> item {e.target} "
          f"copied {e.rating} (real {real}), cosine {e.similarity:.3f}")
