"""
Posterior queries, evidence sweeps, and most probable explanations
==================================================================
"""

import numpy as np

from marketbn.graph import Dag
from marketbn.inference import evidence_sweep, mpe, posterior
from marketbn.model import BayesianNetwork, Cpt
from marketbn.reports import mpe_by_target_state, mpe_csv, sweep_csv
from marketbn.scoring import CANONICAL_STATES

TRI = CANONICAL_STATES

# A small hand-written market: coal and an energy index drive the carbon
# future; the index also feeds an equity benchmark.
coal = Cpt("COAL", TRI, (), (), np.array([[0.34, 0.33, 0.33]]))
energy = Cpt("ENERGY", TRI, (), (), np.array([[0.33, 0.34, 0.33]]))
carbon_rows = np.array([
    [0.62, 0.26, 0.12], [0.45, 0.33, 0.22], [0.30, 0.36, 0.34],
    [0.44, 0.34, 0.22], [0.30, 0.40, 0.30], [0.22, 0.34, 0.44],
    [0.34, 0.36, 0.30], [0.22, 0.33, 0.45], [0.12, 0.26, 0.62],
])
carbon = Cpt("CARBON", TRI, ("COAL", "ENERGY"), (TRI, TRI), carbon_rows)
equity = Cpt("EQUITY", TRI, ("ENERGY",), (TRI,),
             np.array([[0.55, 0.30, 0.15], [0.25, 0.50, 0.25], [0.15, 0.30, 0.55]]))
net = BayesianNetwork(
    Dag(("COAL", "ENERGY", "CARBON", "EQUITY"),
        {("COAL", "CARBON"), ("ENERGY", "CARBON"), ("ENERGY", "EQUITY")}),
    {"COAL": coal, "ENERGY": energy, "CARBON": carbon, "EQUITY": equity},
)

def show(report):
    return {s: round(float(p), 3)
            for s, p in zip(report.states, report.distribution)}


print("baseline:", show(posterior(net, "CARBON", {})))
print("coal high:", show(posterior(net, "CARBON", {"COAL": "High"})))

# evidence_sweep fixes every other node to High and Low in turn and ranks
# the shocks by total variation distance from the baseline
sweep = evidence_sweep(net, "CARBON")
for entry in sweep.entries[:4]:
    print(f"{entry.node}={entry.state}: TVD {entry.tvd:.4f}")
print()
print(sweep_csv(sweep))

# MPE: the single most probable joint configuration of everything else,
# conditioned on each state of the target in turn
results = mpe_by_target_state(net, "CARBON")
print(mpe_csv("CARBON", results))

one = mpe(net, {"CARBON": "High"})
print("log probability of the CARBON=High explanation:",
      round(one.log_probability, 4))
