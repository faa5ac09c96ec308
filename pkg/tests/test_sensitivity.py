"""Influence metrics against brute-force enumeration oracles."""

import math

import numpy as np
import pytest

from marketbn.errors import InputError
from marketbn.graph import Dag
from marketbn.model import BayesianNetwork, Cpt
from marketbn.scoring import CANONICAL_STATES
from marketbn.sensitivity import (
    arc_diameter,
    mutual_information,
    sensitivity_report,
    sobol_index,
    tornado,
)
from marketbn.synthetic import random_network

import oracles

TRI = CANONICAL_STATES

# Frozen oracle values for random_network(4, seed=11), full enumeration.
FROZEN_MI = 0.013518737421620873          # (V3, V0)
FROZEN_SOBOL = 0.015204525631780538       # target V3, source V0
FROZEN_DIAMETERS = {
    ("V0", "V1"): 0.42506762259176123,
    ("V1", "V2"): 0.4227611467608579,
    ("V1", "V3"): 0.8289628971352632,
    ("V2", "V3"): 0.8263742217040919,
}
FROZEN_TORNADO_V1_00 = -0.04135169388961302  # V1 CPT row 0, state Low, target V3=High


@pytest.fixture(scope="module")
def net11():
    return random_network(4, seed=11)


def _cpt(node, rows, parents=(), parent_states=()):
    return Cpt(node, TRI, tuple(parents), tuple(parent_states), rows)


def test_frozen_values(net11):
    assert mutual_information(net11, "V3", "V0") == pytest.approx(
        FROZEN_MI, abs=1e-12
    )
    assert sobol_index(net11, "V3", "V0") == pytest.approx(
        FROZEN_SOBOL, abs=1e-12
    )
    for edge, want in FROZEN_DIAMETERS.items():
        assert arc_diameter(net11, edge) == pytest.approx(want, abs=1e-12)
    entries = tornado(net11, "V3", "High", 200)
    match = [
        e
        for e in entries
        if e.node == "V1"
        and e.state == "Low"
        and e.parent_config == net11.cpt("V1").config_states(0)
    ]
    assert len(match) == 1
    assert match[0].sensitivity_value == pytest.approx(
        FROZEN_TORNADO_V1_00, abs=1e-9
    )
    assert not match[0].one_sided
    assert match[0].direction == -1


def test_mi_symmetry_and_identity(net11):
    for a in net11.dag.nodes:
        for b in net11.dag.nodes:
            if a < b:
                assert mutual_information(net11, a, b) == pytest.approx(
                    mutual_information(net11, b, a), abs=1e-10
                )
    identity = BayesianNetwork(
        Dag(("A", "B"), {("A", "B")}),
        {
            "A": _cpt("A", np.full((1, 3), 1 / 3)),
            "B": _cpt("B", np.eye(3), ("A",), (TRI,)),
        },
    )
    assert mutual_information(identity, "A", "B") == pytest.approx(
        math.log(3.0), abs=1e-10
    )


def test_mi_zero_when_d_separated():
    net = BayesianNetwork(
        Dag(("A", "B", "C"), {("A", "B")}),
        {
            "A": _cpt("A", np.full((1, 3), 1 / 3)),
            "B": _cpt("B", np.eye(3), ("A",), (TRI,)),
            "C": _cpt("C", np.array([[0.2, 0.3, 0.5]])),
        },
    )
    assert mutual_information(net, "A", "C") == pytest.approx(0.0, abs=1e-9)
    assert mutual_information(net, "A", "C") >= 0.0


def test_mi_matches_enumeration(net11):
    for other in ("V0", "V1", "V2"):
        want = oracles.enumerated_mi(net11, "V3", other)
        assert mutual_information(net11, "V3", other) == pytest.approx(
            want, abs=1e-10
        )


def test_sobol_extremes_and_enumeration(net11):
    disconnected = BayesianNetwork(
        Dag(("A", "B"), set()),
        {
            "A": _cpt("A", np.array([[0.2, 0.3, 0.5]])),
            "B": _cpt("B", np.array([[0.6, 0.3, 0.1]])),
        },
    )
    assert sobol_index(disconnected, "B", "A") == pytest.approx(0.0, abs=1e-12)

    copy = BayesianNetwork(
        Dag(("A", "B"), {("A", "B")}),
        {
            "A": _cpt("A", np.array([[0.2, 0.3, 0.5]])),
            "B": _cpt("B", np.eye(3), ("A",), (TRI,)),
        },
    )
    assert sobol_index(copy, "B", "A") == pytest.approx(1.0, abs=1e-12)

    for source in ("V0", "V1", "V2"):
        want = oracles.enumerated_sobol(net11, "V3", source)
        got = sobol_index(net11, "V3", source)
        assert got == pytest.approx(want, abs=1e-9)
        assert 0.0 <= got <= 1.0


def test_sobol_zero_variance_target_raises():
    net = BayesianNetwork(
        Dag(("A", "B"), set()),
        {
            "A": _cpt("A", np.full((1, 3), 1 / 3)),
            "B": _cpt("B", np.array([[1.0, 0.0, 0.0]])),
        },
    )
    with pytest.raises(InputError):
        sobol_index(net, "B", "A")


def test_diameter_extremes_and_enumeration(net11):
    same_rows = BayesianNetwork(
        Dag(("A", "B"), {("A", "B")}),
        {
            "A": _cpt("A", np.full((1, 3), 1 / 3)),
            "B": _cpt("B", np.tile([0.2, 0.3, 0.5], (3, 1)), ("A",), (TRI,)),
        },
    )
    assert arc_diameter(same_rows, ("A", "B")) == pytest.approx(0.0, abs=0.0)

    deterministic = BayesianNetwork(
        Dag(("A", "B"), {("A", "B")}),
        {
            "A": _cpt("A", np.full((1, 3), 1 / 3)),
            "B": _cpt("B", np.eye(3), ("A",), (TRI,)),
        },
    )
    assert arc_diameter(deterministic, ("A", "B")) == pytest.approx(1.0, abs=0.0)

    for edge in net11.dag.edges:
        want = oracles.enumerated_diameter(net11, edge)
        assert arc_diameter(net11, edge) == pytest.approx(want, abs=1e-12)
        whole = oracles.enumerated_diameter(net11, edge, whole_row=True)
        assert arc_diameter(net11, edge, whole_row=True) == pytest.approx(
            whole, abs=1e-12
        )
        assert arc_diameter(net11, edge, whole_row=True) >= arc_diameter(
            net11, edge
        )

    with pytest.raises(InputError):
        arc_diameter(net11, ("V3", "V0"))


def test_diameter_invariant_under_co_parent_permutation():
    rng = np.random.default_rng(3)
    rows = rng.dirichlet([1.0] * 3, size=9)
    a_first = BayesianNetwork(
        Dag(("A", "B", "C"), {("A", "C"), ("B", "C")}),
        {
            "A": _cpt("A", np.full((1, 3), 1 / 3)),
            "B": _cpt("B", np.full((1, 3), 1 / 3)),
            "C": _cpt("C", rows, ("A", "B"), (TRI, TRI)),
        },
    )
    # same conditional law with the parent axes swapped
    swapped = rows.reshape(3, 3, 3).transpose(1, 0, 2).reshape(9, 3)
    b_first = BayesianNetwork(
        Dag(("B", "A", "C"), {("A", "C"), ("B", "C")}),
        {
            "A": _cpt("A", np.full((1, 3), 1 / 3)),
            "B": _cpt("B", np.full((1, 3), 1 / 3)),
            "C": _cpt("C", swapped, ("B", "A"), (TRI, TRI)),
        },
    )
    for edge in (("A", "C"), ("B", "C")):
        assert arc_diameter(a_first, edge) == pytest.approx(
            arc_diameter(b_first, edge), abs=1e-12
        )


def test_tornado_single_node_identity():
    net = BayesianNetwork(
        Dag(("A",), set()),
        {"A": _cpt("A", np.array([[0.3, 0.3, 0.4]]))},
    )
    entries = tornado(net, "A", "High", 3)
    top = entries[0]
    assert top.node == "A" and top.state == "High"
    assert top.sensitivity_value == pytest.approx(1.0, abs=1e-9)


def test_tornado_matches_enumeration(net11):
    entries = tornado(net11, "V3", "High", 10_000)
    checked = 0
    for e in entries[:40]:
        cpt = net11.cpt(e.node)
        row = cpt.row_index(dict(zip(cpt.parents, e.parent_config)))
        col = cpt.states.index(e.state)
        want, one = oracles.enumerated_tornado_value(
            net11, "V3", "High", e.node, row, col
        )
        assert e.sensitivity_value == pytest.approx(float(want), abs=1e-6)
        assert e.one_sided == one
        checked += 1
    assert checked == 40


def test_tornado_off_ancestral_entries_are_exact_zero():
    net = BayesianNetwork(
        Dag(("A", "B"), set()),
        {
            "A": _cpt("A", np.array([[0.2, 0.3, 0.5]])),
            "B": _cpt("B", np.array([[0.6, 0.3, 0.1]])),
        },
    )
    entries = tornado(net, "A", "High", 100)
    for e in entries:
        if e.node == "B":
            assert e.sensitivity_value == 0.0
            assert not e.one_sided


def test_tornado_degenerate_entry_is_one_sided():
    net = BayesianNetwork(
        Dag(("A", "B"), {("A", "B")}),
        {
            "A": _cpt("A", np.array([[0.5, 0.5, 0.0]])),
            "B": _cpt("B", np.eye(3), ("A",), (TRI,)),
        },
    )
    entries = tornado(net, "B", "High", 100)
    flagged = [e for e in entries if e.node == "A" and e.state == "High"]
    assert len(flagged) == 1
    assert flagged[0].one_sided


def test_tornado_sorted_and_top_k(net11):
    entries = tornado(net11, "V3", "High", 7)
    assert len(entries) == 7
    values = [abs(e.sensitivity_value) for e in entries]
    assert values == sorted(values, reverse=True)
    with pytest.raises(InputError):
        tornado(net11, "V3", "High", 0)
    with pytest.raises(InputError):
        tornado(net11, "V3", "Sideways", 5)


def test_tornado_own_cpt_dominates_under_weak_parents():
    """Weak parent rows leave the target's own table as the main lever."""
    near_uniform = np.tile([0.34, 0.33, 0.33], (3, 1))
    net = BayesianNetwork(
        Dag(("P", "T"), {("P", "T")}),
        {
            "P": _cpt("P", np.full((1, 3), 1 / 3)),
            "T": _cpt("T", near_uniform, ("P",), (TRI,)),
        },
    )
    entries = tornado(net, "T", "High", 5)
    assert all(e.node == "T" for e in entries)


def test_report_ranks_are_competition_style(net11):
    report = sensitivity_report(net11, "V3")
    sob = report.sobol
    for node, rank in report.ranks["sobol"].items():
        assert rank == 1 + sum(1 for v in sob.values() if v > sob[node])
    assert set(report.mutual_information) == {"V0", "V1", "V2"}
    assert set(report.diameter) == set(net11.dag.edges)
    for d in report.diameter.values():
        assert 0.0 <= d <= 1.0


def test_report_rank_ties_share_smaller_rank():
    net = BayesianNetwork(
        Dag(("A", "B", "T"), set()),
        {
            "A": _cpt("A", np.full((1, 3), 1 / 3)),
            "B": _cpt("B", np.full((1, 3), 1 / 3)),
            "T": _cpt("T", np.array([[0.2, 0.3, 0.5]])),
        },
    )
    report = sensitivity_report(net, "T")
    # both inputs are disconnected: identical zero scores, shared rank 1
    assert report.ranks["sobol"] == {"A": 1, "B": 1}
