"""Frozen CSV/DOT layouts for every artifact the pipeline writes."""

import numpy as np
import pytest

from marketbn.dbn import TwoSliceNetwork
from marketbn.errors import InputError
from marketbn.garch import FilterModel
from marketbn.graph import Dag, Pdag, cpdag
from marketbn.inference import evidence_sweep, posterior
from marketbn.model import BayesianNetwork, Cpt
from marketbn.reports import (
    dag_to_dot,
    filter_csv,
    frequency_csv,
    mpe_by_target_state,
    mpe_csv,
    pdag_to_dot,
    posterior_to_dict,
    sensitivity_csv,
    sweep_csv,
    temporal_csv,
    tornado_csv,
)
from marketbn.scoring import CANONICAL_STATES
from marketbn.search import EdgeFrequencies
from marketbn.sensitivity import sensitivity_report, tornado
from marketbn.synthetic import random_network

TRI = CANONICAL_STATES


@pytest.fixture(scope="module")
def net11():
    return random_network(4, seed=11)


def test_sweep_csv_layout(net11):
    sweep = evidence_sweep(net11, "V3")
    text = sweep_csv(sweep)
    lines = text.splitlines()
    assert lines[0] == (
        "node,High_High,High_Neutral,High_Low,Low_High,Low_Neutral,Low_Low"
    )
    # one row per non-target node, ordered by the sweep's influence ranking
    assert len(lines) == 1 + 3
    first_node = lines[1].split(",")[0]
    assert first_node == sweep.entries[0].node
    # cells are fixed six-decimal probabilities
    cells = lines[1].split(",")[1:]
    assert all(len(c.split(".")[1]) == 6 for c in cells)
    high_block = [float(c) for c in cells[:3]]
    want = posterior(net11, "V3", {first_node: "High"}).distribution
    states = list(net11.states("V3"))
    for col, label in enumerate(["High", "Neutral", "Low"]):
        assert high_block[col] == pytest.approx(
            want[states.index(label)], abs=5e-7
        )


def test_sweep_csv_with_neutral_block(net11):
    text = sweep_csv(evidence_sweep(net11, "V3", include_neutral=True))
    header = text.splitlines()[0].split(",")
    assert header[1:4] == ["High_High", "High_Neutral", "High_Low"]
    assert header[4:7] == ["Low_High", "Low_Neutral", "Low_Low"]
    assert header[7:10] == ["Neutral_High", "Neutral_Neutral", "Neutral_Low"]


def test_mpe_csv_layout(net11):
    results = mpe_by_target_state(net11, "V3")
    text = mpe_csv("V3", results)
    lines = text.splitlines()
    assert lines[0] == "node,V3=High,V3=Low,V3=Neutral"
    assert [r.split(",")[0] for r in lines[1:]] == ["V0", "V1", "V2"]
    for line in lines[1:]:
        assert all(cell in TRI for cell in line.split(",")[1:])


def test_sensitivity_csv_layout(net11):
    report = sensitivity_report(net11, "V3")
    text = sensitivity_csv(report)
    lines = text.splitlines()
    assert lines[0] == "node,mutual_information_x100,mi_rank,sobol_index,sobol_rank"
    sobol_col = [float(r.split(",")[3]) for r in lines[1:]]
    assert sobol_col == sorted(sobol_col, reverse=True)
    top = lines[1].split(",")
    assert top[4] == "1"
    assert float(top[1]) == pytest.approx(
        100.0 * report.mutual_information[top[0]], abs=5e-7
    )
    plain = sensitivity_csv(report, mi_times_100=False)
    assert plain.splitlines()[0].split(",")[1] == "mutual_information"


def test_tornado_csv_layout(net11):
    entries = tornado(net11, "V3", "High", 5)
    text = tornado_csv(entries)
    lines = text.splitlines()
    assert lines[0] == (
        "node,parent_config,state,baseline_output,sensitivity_value,"
        "direction,one_sided"
    )
    assert len(lines) == 6
    for line, entry in zip(lines[1:], entries):
        cells = line.split(",")
        assert cells[0] == entry.node
        assert cells[1] == "|".join(entry.parent_config)
        assert cells[5] in ("-1", "0", "1")
        assert cells[6] in ("yes", "no")


def test_frequency_csv_layout():
    freqs = EdgeFrequencies(
        undirected={("A", "B"): 0.8, ("A", "C"): 0.4},
        directed={("B", "A"): 0.5, ("A", "B"): 0.3, ("A", "C"): 0.4},
    )
    assert frequency_csv(freqs) == (
        "node_a,node_b,undirected_frequency,a_to_b,b_to_a\n"
        "A,B,0.800000,0.300000,0.500000\n"
        "A,C,0.400000,0.400000,0.000000\n"
    )


def test_filter_csv_layout():
    def model(mode, lag, bic):
        return FilterModel(
            instrument="X", mode=mode, ar_order=lag, garch_p=1, garch_q=1,
            mean_params=(0.0,) * (lag + 1), variance_params=(0.1, 0.1, 0.8),
            bic=bic, residuals=np.zeros(3),
        )

    text = filter_csv(
        {
            "ar_garch": {"X": model("ar_garch", 2, 123.4567891)},
            "garch_only": {"X": model("garch_only", 0, 150.0), "Y": None},
        }
    )
    lines = text.splitlines()
    assert lines[0] == (
        "instrument,ar_garch_lag,ar_garch_p,ar_garch_q,ar_garch_bic,"
        "garch_only_lag,garch_only_p,garch_only_q,garch_only_bic"
    )
    assert lines[1] == "X,2,1,1,123.4568,0,1,1,150.0000"
    assert lines[2] == "Y,,,,,,,,"


def test_dag_dot_format():
    dag = Dag(("A", "B", "C"), {("A", "B"), ("B", "C")})
    text = dag_to_dot(dag, widths={("A", "B"): 0.425291, ("B", "C"): 1.0})
    lines = text.splitlines()
    assert lines[0] == "digraph network {"
    assert lines[-1] == "}"
    assert '  "A";' in lines
    assert '  "A" -> "B" [diameter=0.425291, penwidth=2.413810];' in lines
    assert '  "B" -> "C" [diameter=1.000000, penwidth=5.000000];' in lines
    assert text.endswith("}\n")
    bare = dag_to_dot(dag)
    assert '  "A" -> "B";' in bare.splitlines()
    with pytest.raises(InputError, match="missing width"):
        dag_to_dot(dag, widths={("A", "B"): 0.5})


def test_pdag_dot_marks_undirected_pairs():
    dag = Dag(("A", "B", "C"), {("A", "B"), ("C", "B")})
    pd = cpdag(dag)  # collider: everything stays directed
    assert isinstance(pd, Pdag)
    text = pdag_to_dot(pd)
    assert '  "A" -> "B";' in text.splitlines()
    chain = cpdag(Dag(("A", "B"), {("A", "B")}))
    text2 = pdag_to_dot(chain, widths={("A", "B"): 0.5})
    assert (
        '  "A" -> "B" [diameter=0.500000, penwidth=2.750000, dir=none];'
        in text2.splitlines()
    )


def test_quoting_of_awkward_names():
    dag = Dag(('Q"T', "B C"), {('Q"T', "B C")})
    text = dag_to_dot(dag)
    assert '  "Q\\"T" -> "B C";' in text.splitlines()


def test_temporal_csv_layout():
    a = Cpt("A", TRI, (), (), np.array([[0.5, 0.3, 0.2]]))
    b = Cpt(
        "B", TRI, ("A",), (TRI,),
        np.array([[0.7, 0.2, 0.1], [0.2, 0.6, 0.2], [0.1, 0.3, 0.6]]),
    )
    static = BayesianNetwork(Dag(("A", "B"), {("A", "B")}), {"A": a, "B": b})
    tsn = TwoSliceNetwork(
        static_net=static,
        transition_parents={"A@T+1": ("A",), "B@T+1": ()},
        transition_cpts={
            "A@T+1": Cpt("A@T+1", TRI, ("A",), (TRI,), np.eye(3)),
            "B@T+1": Cpt("B@T+1", TRI, (), (), np.array([[0.4, 0.3, 0.3]])),
        },
    )
    text = temporal_csv(tsn, "B", [("A", "High"), ("A", "Low")])
    lines = text.splitlines()
    assert lines[0] == (
        "evidence,T_High,T_Neutral,T_Low,T+1_High,T+1_Neutral,T+1_Low"
    )
    assert lines[1].startswith("A=High,")
    # B@T+1 is parentless, so its block repeats the fixed marginal
    assert lines[1].endswith("0.300000,0.300000,0.400000")
    assert lines[2].startswith("A=Low,")
    t_high = float(lines[1].split(",")[1])
    want = posterior(static, "B", {"A": "High"}).distribution
    assert t_high == pytest.approx(want[2], abs=5e-7)


def test_posterior_dict_shape(net11):
    report = posterior(net11, "V3", {"V0": "High"})
    payload = posterior_to_dict(report)
    assert payload["target"] == "V3"
    assert payload["evidence"] == {"V0": "High"}
    assert payload["states"] == list(net11.states("V3"))
    assert sum(payload["distribution"]) == pytest.approx(1.0, abs=1e-12)
