"""
Next-day dynamics with a two-slice network
==========================================

The temporal layer links today's states to tomorrow's while leaving the
contemporaneous network untouched. Here one series is deliberately sticky,
the other is noise, and the learner is expected to notice exactly that.
"""

from datetime import date, timedelta

import numpy as np

from marketbn.dbn import learn_transitions, temporal_query, unroll
from marketbn.discretize import DiscretePanel
from marketbn.graph import Dag
from marketbn.model import fit_mle
from marketbn.reports import temporal_csv

rng = np.random.default_rng(42)
n = 600

# CARBON keeps yesterday's state 75% of the time. GOLD has no memory of its
# own but mirrors CARBON half the time within the same day.
carbon = np.empty(n, dtype=np.int8)
carbon[0] = 1
for t in range(1, n):
    if rng.random() < 0.75:
        carbon[t] = carbon[t - 1]
    else:
        carbon[t] = (carbon[t - 1] + rng.integers(1, 3)) % 3
gold = np.where(
    rng.random(n) < 0.5, carbon, rng.integers(0, 3, n)
).astype(np.int8)

days = tuple(date(2020, 1, 1) + timedelta(days=i) for i in range(n))
panel = DiscretePanel(
    days,
    {"CARBON": carbon, "GOLD": gold},
    {"CARBON": (-0.1, 0.1), "GOLD": (-0.1, 0.1)},
)

# the static slice is fixed before the temporal layer is learned
static = fit_mle(
    Dag(panel.names, {("CARBON", "GOLD")}), panel.as_table()
)
tsn = learn_transitions(panel, static, resamples=50, seed=0)

print("transition parents (today -> tomorrow):")
for child, parents in tsn.transition_parents.items():
    print(f"  {child} <- {parents or '(none)'}")
print("bootstrap support:", tsn.metadata.get("transition_frequencies"))

# conditional view of tomorrow given a shock today
for state in ("High", "Low"):
    at_t, at_t1 = temporal_query(tsn, {"GOLD": state}, "CARBON")
    print(f"\nGOLD={state}:")
    print("  today   ", [round(float(p), 3) for p in at_t.distribution])
    print("  tomorrow", [round(float(p), 3) for p in at_t1.distribution])

shocks = [("GOLD", "High"), ("GOLD", "Low")]
print()
print(temporal_csv(tsn, "CARBON", shocks))

# the two-slice model flattens to an ordinary network when needed
flat = unroll(tsn)
print("unrolled nodes:", flat.dag.nodes)
