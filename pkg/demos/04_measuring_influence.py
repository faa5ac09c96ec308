"""
Four ways to measure influence on one node
==========================================

Mutual information, Sobol variance shares, arc diameters, and tornado
sensitivity all answer "what moves the target?", each from a different angle.
"""

import numpy as np

from marketbn.graph import Dag
from marketbn.model import BayesianNetwork, Cpt
from marketbn.reports import sensitivity_csv, tornado_csv
from marketbn.scoring import CANONICAL_STATES
from marketbn.sensitivity import (
    arc_diameter,
    mutual_information,
    sensitivity_report,
    sobol_index,
    tornado,
)

TRI = CANONICAL_STATES

coal = Cpt("COAL", TRI, (), (), np.array([[0.34, 0.33, 0.33]]))
energy = Cpt("ENERGY", TRI, (), (), np.array([[0.33, 0.34, 0.33]]))
carbon_rows = np.array([
    [0.62, 0.26, 0.12], [0.45, 0.33, 0.22], [0.30, 0.36, 0.34],
    [0.44, 0.34, 0.22], [0.30, 0.40, 0.30], [0.22, 0.34, 0.44],
    [0.34, 0.36, 0.30], [0.22, 0.33, 0.45], [0.12, 0.26, 0.62],
])
carbon = Cpt("CARBON", TRI, ("COAL", "ENERGY"), (TRI, TRI), carbon_rows)
gold = Cpt("GOLD", TRI, (), (), np.array([[0.3, 0.4, 0.3]]))  # disconnected
net = BayesianNetwork(
    Dag(("COAL", "ENERGY", "CARBON", "GOLD"),
        {("COAL", "CARBON"), ("ENERGY", "CARBON")}),
    {"COAL": coal, "ENERGY": energy, "CARBON": carbon, "GOLD": gold},
)

# mutual information: statistical dependence, symmetric in its arguments
for other in ("COAL", "ENERGY", "GOLD"):
    print(f"MI(CARBON, {other}) = {mutual_information(net, 'CARBON', other):.6f}")

# Sobol index: share of the target's variance explained by conditioning
for other in ("COAL", "ENERGY", "GOLD"):
    print(f"Sobol(CARBON <- {other}) = {sobol_index(net, 'CARBON', other):.6f}")

# arc diameter: worst-case total variation between two rows of a child's
# CPT that differ only in this parent; 0 means the arc is vacuous
for edge in sorted(net.dag.edges):
    print(f"diameter{edge} = {arc_diameter(net, edge):.6f}")

# one call bundles all of the above with competition ranks
report = sensitivity_report(net, "CARBON")
print()
print(sensitivity_csv(report))

# tornado: slope of P(CARBON=High) as each single CPT entry is nudged
# up and down by delta with the rest of its row rescaled proportionally
entries = tornado(net, "CARBON", "High", 5, delta=0.05)
print(tornado_csv(entries))
