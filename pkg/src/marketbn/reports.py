"""Report serialization: JSON dicts, CSV tables, DOT graph exports."""

from __future__ import annotations

import csv
import io
from typing import Mapping, Sequence

from .dbn import TwoSliceNetwork, base_name, temporal_query
from .errors import InputError, ZeroProbabilityEvidenceError
from .garch import FilterModel
from .graph import Dag, Pdag
from .inference import MpeResult, PosteriorReport, SweepResult, mpe
from .model import BayesianNetwork
from .scoring import CANONICAL_STATES
from .search import EdgeFrequencies
from .sensitivity import SensitivityReport, TornadoEntry

PROB_FMT = "{:.6f}"


def _fmt(p: float) -> str:
    return PROB_FMT.format(p)


def posterior_to_dict(report: PosteriorReport) -> dict:
    return {
        "target": report.target,
        "states": list(report.states),
        "distribution": [float(p) for p in report.distribution],
        "evidence": dict(report.evidence),
    }


def mpe_to_dict(result: MpeResult) -> dict:
    return {
        "assignment": dict(result.assignment),
        "log_probability": float(result.log_probability),
    }


def sweep_to_dict(sweep: SweepResult) -> dict:
    return {
        "baseline": posterior_to_dict(sweep.baseline),
        "entries": [
            {
                "node": e.node,
                "state": e.state,
                "tvd": float(e.tvd),
                "distribution": [float(p) for p in e.report.distribution],
            }
            for e in sweep.entries
        ],
    }


def render_csv(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _display_states(states: Sequence[str]) -> list[str]:
    """High/Neutral/Low column convention for the ternary state space."""
    if set(states) == set(CANONICAL_STATES):
        return ["High", "Neutral", "Low"]
    return list(states)


def sweep_csv(sweep: SweepResult) -> str:
    """Wide table: one row per node, one column block per swept state.

    Blocks follow the High-then-Low convention (plus any further swept
    states); within a block, columns follow the display state order. Rows
    keep the sweep's influence ordering by each node's strongest entry.
    """
    target_states = list(sweep.baseline.states)
    display = _display_states(target_states)
    col_of = {s: target_states.index(s) for s in display}

    block_order: list[str] = []
    for e in sweep.entries:
        if e.state not in block_order:
            block_order.append(e.state)
    preferred = [s for s in ("High", "Low", "Neutral") if s in block_order]
    block_order = preferred + [s for s in block_order if s not in preferred]

    by_node: dict[str, dict] = {}
    node_order: list[str] = []
    for e in sweep.entries:
        if e.node not in by_node:
            by_node[e.node] = {}
            node_order.append(e.node)
        by_node[e.node][e.state] = e

    header = ["node"]
    for block in block_order:
        header.extend(f"{block}_{s}" for s in display)
    rows = []
    for node in node_order:
        row = [node]
        for block in block_order:
            entry = by_node[node].get(block)
            if entry is None:
                row.extend("" for _ in display)
            else:
                dist = entry.report.distribution
                row.extend(_fmt(dist[col_of[s]]) for s in display)
        rows.append(row)
    return render_csv(header, rows)


def mpe_by_target_state(
    net: BayesianNetwork, target: str
) -> dict[str, MpeResult]:
    """MPE of the rest of the network under each state of ``target``.

    States whose single-node evidence has zero probability are omitted.
    """
    results: dict[str, MpeResult] = {}
    for state in net.states(target):
        try:
            results[state] = mpe(net, {target: state})
        except ZeroProbabilityEvidenceError:
            continue
    if not results:
        raise InputError(f"every state of {target!r} has probability zero")
    return results


def mpe_csv(target: str, results: Mapping[str, MpeResult]) -> str:
    """One row per explained node (alphabetical), one column per condition."""
    states = sorted(results)
    nodes = sorted(
        {n for r in results.values() for n in r.assignment}
    )
    header = ["node"] + [f"{target}={s}" for s in states]
    rows = [
        [node] + [results[s].assignment.get(node, "") for s in states]
        for node in nodes
    ]
    return render_csv(header, rows)


def sensitivity_to_dict(report: SensitivityReport) -> dict:
    return {
        "target": report.target,
        "mutual_information": {k: float(v) for k, v in report.mutual_information.items()},
        "sobol": {k: float(v) for k, v in report.sobol.items()},
        "diameter": {f"{a}->{b}": float(v) for (a, b), v in report.diameter.items()},
        "ranks": {
            "mutual_information": dict(report.ranks["mutual_information"]),
            "sobol": dict(report.ranks["sobol"]),
            "diameter": {
                f"{a}->{b}": r for (a, b), r in report.ranks["diameter"].items()
            },
        },
    }


def sensitivity_csv(report: SensitivityReport, *, mi_times_100: bool = True) -> str:
    """Per-node table ordered by decreasing variance share.

    ``mi_times_100`` keeps the common percent-style scaling of the mutual
    information column.
    """
    scale = 100.0 if mi_times_100 else 1.0
    mi_header = "mutual_information_x100" if mi_times_100 else "mutual_information"
    nodes = sorted(report.sobol, key=lambda n: (-report.sobol[n], n))
    header = ["node", mi_header, "mi_rank", "sobol_index", "sobol_rank"]
    rows = [
        [
            n,
            _fmt(report.mutual_information[n] * scale),
            str(report.ranks["mutual_information"][n]),
            _fmt(report.sobol[n]),
            str(report.ranks["sobol"][n]),
        ]
        for n in nodes
    ]
    return render_csv(header, rows)


def tornado_entries_to_dicts(entries: Sequence[TornadoEntry]) -> list[dict]:
    return [
        {
            "node": e.node,
            "parent_config": list(e.parent_config),
            "state": e.state,
            "baseline_output": float(e.baseline_output),
            "sensitivity_value": float(e.sensitivity_value),
            "direction": int(e.direction),
            "one_sided": bool(e.one_sided),
        }
        for e in entries
    ]


def tornado_csv(entries: Sequence[TornadoEntry]) -> str:
    header = [
        "node",
        "parent_config",
        "state",
        "baseline_output",
        "sensitivity_value",
        "direction",
        "one_sided",
    ]
    rows = [
        [
            e.node,
            "|".join(e.parent_config),
            e.state,
            _fmt(e.baseline_output),
            _fmt(e.sensitivity_value),
            str(e.direction),
            "yes" if e.one_sided else "no",
        ]
        for e in entries
    ]
    return render_csv(header, rows)


def temporal_csv(
    tsn: TwoSliceNetwork,
    target: str,
    evidence_items: Sequence[tuple[str, str]],
) -> str:
    """Shock table: target distribution today and tomorrow per evidence row.

    Rows whose evidence has probability zero are skipped.
    """
    states = tsn.static_net.states(target)
    display = _display_states(states)
    col_of = {s: states.index(s) for s in display}
    header = ["evidence"]
    header.extend(f"T_{s}" for s in display)
    header.extend(f"T+1_{s}" for s in display)
    rows = []
    for node, state in evidence_items:
        try:
            at_t, at_t1 = temporal_query(tsn, {node: state}, target)
        except ZeroProbabilityEvidenceError:
            continue
        row = [f"{node}={state}"]
        row.extend(_fmt(at_t.distribution[col_of[s]]) for s in display)
        row.extend(_fmt(at_t1.distribution[col_of[s]]) for s in display)
        rows.append(row)
    return render_csv(header, rows)


def temporal_to_dict(
    at_t: PosteriorReport, at_t1: PosteriorReport
) -> dict:
    return {
        "at_T": posterior_to_dict(at_t),
        "at_T+1": {
            **posterior_to_dict(at_t1),
            "target": base_name(at_t1.target),
        },
    }


def frequency_csv(freqs: EdgeFrequencies) -> str:
    """Per-pair bootstrap support with the directed split."""
    header = ["node_a", "node_b", "undirected_frequency", "a_to_b", "b_to_a"]
    rows = []
    for (a, b) in sorted(freqs.undirected):
        rows.append(
            [
                a,
                b,
                _fmt(freqs.undirected[(a, b)]),
                _fmt(freqs.directed.get((a, b), 0.0)),
                _fmt(freqs.directed.get((b, a), 0.0)),
            ]
        )
    return render_csv(header, rows)


def filter_csv(models_by_mode: Mapping[str, Mapping[str, FilterModel]]) -> str:
    """One row per instrument; (lag, p, q, BIC) block per filter mode."""
    modes = list(models_by_mode)
    instruments = sorted(
        {name for models in models_by_mode.values() for name in models}
    )
    header = ["instrument"]
    for mode in modes:
        header.extend(
            (f"{mode}_lag", f"{mode}_p", f"{mode}_q", f"{mode}_bic")
        )
    rows = []
    for name in instruments:
        row = [name]
        for mode in modes:
            model = models_by_mode[mode].get(name)
            if model is None:
                row.extend(("", "", "", ""))
            else:
                row.extend(
                    (
                        str(model.ar_order),
                        str(model.garch_p),
                        str(model.garch_q),
                        f"{model.bic:.4f}",
                    )
                )
        rows.append(row)
    return render_csv(header, rows)


def _quote(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def dag_to_dot(
    dag: Dag,
    *,
    widths: Mapping[tuple[str, str], float] | None = None,
) -> str:
    """Graphviz text; optional per-edge strength drives the pen width."""
    lines = ["digraph network {"]
    for n in dag.nodes:
        lines.append(f"  {_quote(n)};")
    for a, b in sorted(dag.edges):
        attrs = []
        if widths is not None:
            if (a, b) not in widths:
                raise InputError(f"missing width for edge {(a, b)!r}")
            w = float(widths[(a, b)])
            attrs.append(f"diameter={w:.6f}")
            attrs.append(f"penwidth={0.5 + 4.5 * w:.6f}")
        suffix = f" [{', '.join(attrs)}]" if attrs else ""
        lines.append(f"  {_quote(a)} -> {_quote(b)}{suffix};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def pdag_to_dot(
    pdag: Pdag,
    *,
    widths: Mapping[tuple[str, str], float] | None = None,
) -> str:
    """Graphviz text for a partially directed graph.

    Undirected pairs render with ``dir=none``; widths are keyed by directed
    edge or canonical pair.
    """

    def attrs_for(key):
        attrs = []
        if widths is not None and key in widths:
            w = float(widths[key])
            attrs.append(f"diameter={w:.6f}")
            attrs.append(f"penwidth={0.5 + 4.5 * w:.6f}")
        return attrs

    lines = ["digraph network {"]
    for n in pdag.nodes:
        lines.append(f"  {_quote(n)};")
    for a, b in sorted(pdag.directed):
        attrs = attrs_for((a, b))
        suffix = f" [{', '.join(attrs)}]" if attrs else ""
        lines.append(f"  {_quote(a)} -> {_quote(b)}{suffix};")
    for a, b in sorted(pdag.undirected):
        attrs = attrs_for((a, b)) + ["dir=none"]
        lines.append(f"  {_quote(a)} -> {_quote(b)} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
