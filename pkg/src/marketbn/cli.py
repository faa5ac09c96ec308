"""Command-line pipeline: prep, learn, analyze, dbn, serve, export-dot."""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import dbn as dbn_mod
from . import reports
from .discretize import DiscretePanel, discretize
from .errors import FitError, InputError, ZeroProbabilityEvidenceError
from .garch import filter_panel
from .graph import cpdag
from .inference import evidence_sweep
from .model import fit_mle, load_network, save_network
from .panel import load_panel, to_log_returns
from .scoring import BDeuConfig
from .search import SearchControls, bootstrap_consensus
from .sensitivity import arc_diameter, sensitivity_report, tornado


@dataclass
class PipelineConfig:
    """Every knob of the pipeline; a flat config file and CLI flags fill it."""

    input: str = ""
    output_dir: str = "out"
    tickers: str = ""          # comma-separated subset; empty = all columns
    target: str = ""
    seed: int = 0
    resamples: int = 200
    threshold: float = 0.5
    ess: float = 10.0
    max_lag: int = 7
    max_p: int = 9
    max_q: int = 9
    max_in_degree: int = 4
    use_directed_frequency: bool = False
    include_neutral: bool = False
    top_k: int = 20
    delta: float = 0.05
    mi_times_100: bool = True
    shock_nodes: str = ""      # comma-separated; empty = every non-target node
    single_run: bool = False
    model: str = ""            # model JSON path for analyze/serve/export-dot
    two_slice: str = ""        # two-slice JSON path for serve
    port: int = 8080

    def list_field(self, name: str) -> list[str]:
        raw = getattr(self, name)
        return [item.strip() for item in raw.split(",") if item.strip()]


_BOOL_WORDS = {"true": True, "false": False, "yes": True, "no": False,
               "1": True, "0": False}


def _coerce(name: str, kind: type, raw: str):
    if kind is bool:
        try:
            return _BOOL_WORDS[raw.strip().lower()]
        except KeyError:
            raise InputError(f"config key {name!r}: not a boolean: {raw!r}") from None
    try:
        return kind(raw.strip())
    except ValueError:
        raise InputError(
            f"config key {name!r}: cannot parse {raw!r} as {kind.__name__}"
        ) from None


def parse_config_file(path: str | Path) -> dict:
    """Flat ``key = value`` lines; ``#`` comments and blank lines ignored."""
    fields = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}
    types = {"int": int, "float": float, "bool": bool, "str": str}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read config file {path}: {exc}") from None
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise InputError(f"config line {lineno}: expected key=value")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in fields:
            raise InputError(f"config line {lineno}: unknown key {key!r}")
        kind = fields[key]
        if isinstance(kind, str):  # dataclass stores annotations as strings
            kind = types.get(kind, str)
        values[key] = _coerce(key, kind, raw)
    return values


def build_config(args: argparse.Namespace) -> PipelineConfig:
    """Defaults, then config file entries, then explicit CLI flags."""
    values: dict = {}
    if getattr(args, "config", None):
        values.update(parse_config_file(args.config))
    for f in dataclasses.fields(PipelineConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    return PipelineConfig(**values)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _write_json(path: Path, payload: dict) -> None:
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_manifest(
    out: Path, command: str, config: PipelineConfig,
    inputs: list[Path], outputs: list[Path],
) -> None:
    payload = {
        "command": command,
        "config": dataclasses.asdict(config),
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": {p.name: _sha256(p) for p in outputs},
    }
    _write_json(out / f"manifest_{command}.json", payload)


def _controls(config: PipelineConfig) -> SearchControls:
    return SearchControls(max_in_degree=config.max_in_degree)


def _bdeu(config: PipelineConfig) -> BDeuConfig:
    return BDeuConfig(equivalent_sample_size=config.ess)


def cmd_prep(config: PipelineConfig) -> None:
    """Prices to two discretized panels, one per filter mode."""
    if not config.input:
        raise InputError("prep needs an input CSV (set input= or --input)")
    out = Path(config.output_dir)
    tickers = config.list_field("tickers") or None
    panel = load_panel(config.input, columns=tickers)
    returns = to_log_returns(panel)

    models_by_mode = {}
    outputs = []
    for mode, fname in (("ar_garch", "panel_static.json"),
                        ("garch_only", "panel_temporal.json")):
        residuals, models = filter_panel(
            returns, mode,
            max_lag=config.max_lag, max_p=config.max_p, max_q=config.max_q,
        )
        models_by_mode[mode] = models
        discrete = discretize(residuals)
        path = out / fname
        path.parent.mkdir(parents=True, exist_ok=True)
        discrete.save(path)
        outputs.append(path)

    filters_csv = out / "filters.csv"
    _write_text(filters_csv, reports.filter_csv(models_by_mode))
    outputs.append(filters_csv)

    filters_json = out / "filters.json"
    _write_json(filters_json, {
        mode: {
            name: {
                "ar_order": m.ar_order,
                "garch_p": m.garch_p,
                "garch_q": m.garch_q,
                "bic": m.bic,
                "mean_params": list(m.mean_params),
                "variance_params": list(m.variance_params),
            }
            for name, m in models.items()
        }
        for mode, models in models_by_mode.items()
    })
    outputs.append(filters_json)
    _write_manifest(out, "prep", config, [Path(config.input)], outputs)


def _diameters(net) -> dict:
    return {e: arc_diameter(net, e) for e in sorted(net.dag.edges)}


def _export_dots(net, out: Path) -> list[Path]:
    widths = _diameters(net)
    dot_path = out / "network.dot"
    _write_text(dot_path, reports.dag_to_dot(net.dag, widths=widths))
    pdag = cpdag(net.dag)
    und_widths = dict(widths)
    for a, b in pdag.undirected:
        key = (a, b) if (a, b) in widths else (b, a)
        und_widths[(min(a, b), max(a, b))] = widths[key]
    cpdag_path = out / "network_cpdag.dot"
    _write_text(cpdag_path, reports.pdag_to_dot(pdag, widths=und_widths))
    return [dot_path, cpdag_path]


def cmd_learn(config: PipelineConfig) -> None:
    """Consensus structure plus MLE parameters from the static panel."""
    out = Path(config.output_dir)
    panel_path = out / "panel_static.json"
    panel = DiscretePanel.load(panel_path)
    table = panel.as_table()
    dag, freqs = bootstrap_consensus(
        table,
        config.resamples,
        config.threshold,
        config=_bdeu(config),
        controls=_controls(config),
        seed=config.seed,
        use_directed_frequency=config.use_directed_frequency,
    )
    net = fit_mle(dag, table, metadata={
        "seed": config.seed,
        "resamples": config.resamples,
        "threshold": config.threshold,
        "ess": config.ess,
    })
    model_path = out / "model.json"
    save_network(net, model_path)
    freq_path = out / "frequencies.csv"
    _write_text(freq_path, reports.frequency_csv(freqs))
    outputs = [model_path, freq_path] + _export_dots(net, out)
    _write_manifest(out, "learn", config, [panel_path], outputs)


def _require_target(config: PipelineConfig, net) -> str:
    target = config.target
    if not target:
        raise InputError("analyze needs a target node (set target= or --target)")
    if target not in set(net.dag.nodes):
        raise InputError(f"unknown target {target!r}")
    return target


def cmd_analyze(config: PipelineConfig) -> None:
    """Evidence sweep, MPE per target state, sensitivity metrics, tornado."""
    out = Path(config.output_dir)
    model_path = Path(config.model) if config.model else out / "model.json"
    net = load_network(model_path)
    target = _require_target(config, net)

    sweep = evidence_sweep(net, target, include_neutral=config.include_neutral)
    mpe_results = reports.mpe_by_target_state(net, target)
    sens = sensitivity_report(net, target)
    tornado_by_state = {
        state: tornado(net, target, state, config.top_k, delta=config.delta)
        for state in net.states(target)
    }

    outputs = []
    sweep_path = out / "sweep.csv"
    _write_text(sweep_path, reports.sweep_csv(sweep))
    outputs.append(sweep_path)

    mpe_path = out / "mpe.csv"
    _write_text(mpe_path, reports.mpe_csv(target, mpe_results))
    outputs.append(mpe_path)

    sens_path = out / "sensitivity.csv"
    _write_text(
        sens_path,
        reports.sensitivity_csv(sens, mi_times_100=config.mi_times_100),
    )
    outputs.append(sens_path)

    for state, entries in tornado_by_state.items():
        path = out / f"tornado_{state}.csv"
        _write_text(path, reports.tornado_csv(entries))
        outputs.append(path)

    analysis_path = out / "analysis.json"
    _write_json(analysis_path, {
        "target": target,
        "baseline": reports.posterior_to_dict(sweep.baseline),
        "sweep": reports.sweep_to_dict(sweep),
        "mpe": {s: reports.mpe_to_dict(r) for s, r in mpe_results.items()},
        "sensitivity": reports.sensitivity_to_dict(sens),
        "tornado": {
            s: reports.tornado_entries_to_dicts(entries)
            for s, entries in tornado_by_state.items()
        },
    })
    outputs.append(analysis_path)
    _write_manifest(out, "analyze", config, [model_path], outputs)


def cmd_dbn(config: PipelineConfig) -> None:
    """Static slice plus transition layer from the temporal panel."""
    out = Path(config.output_dir)
    panel_path = out / "panel_temporal.json"
    panel = DiscretePanel.load(panel_path)
    table = panel.as_table()
    dag, _ = bootstrap_consensus(
        table,
        config.resamples,
        config.threshold,
        config=_bdeu(config),
        controls=_controls(config),
        seed=config.seed,
        use_directed_frequency=config.use_directed_frequency,
    )
    static_net = fit_mle(dag, table, metadata={
        "seed": config.seed,
        "resamples": config.resamples,
        "threshold": config.threshold,
        "ess": config.ess,
    })
    tsn = dbn_mod.learn_transitions(
        panel,
        static_net,
        resamples=config.resamples,
        threshold=config.threshold,
        config=_bdeu(config),
        controls=_controls(config),
        seed=config.seed,
        single_run=config.single_run,
    )
    model_path = out / "two_slice.json"
    dbn_mod.save_two_slice(tsn, model_path)
    outputs = [model_path]

    target = _require_target(config, static_net)
    shock_nodes = config.list_field("shock_nodes") or [
        n for n in static_net.dag.nodes if n != target
    ]
    evidence_items = []
    for node in shock_nodes:
        if node not in set(static_net.dag.nodes):
            raise InputError(f"shock node {node!r} is not in the network")
        for state in ("High", "Low"):
            if state in static_net.states(node):
                evidence_items.append((node, state))
    temporal_path = out / "temporal.csv"
    _write_text(
        temporal_path, reports.temporal_csv(tsn, target, evidence_items)
    )
    outputs.append(temporal_path)
    _write_manifest(out, "dbn", config, [panel_path], outputs)


def cmd_export_dot(config: PipelineConfig) -> None:
    """DOT files (directed and equivalence-class) for an existing model."""
    out = Path(config.output_dir)
    model_path = Path(config.model) if config.model else out / "model.json"
    net = load_network(model_path)
    outputs = _export_dots(net, out)
    _write_manifest(out, "export-dot", config, [model_path], outputs)


def cmd_serve(config: PipelineConfig) -> None:
    import uvicorn

    from .service import create_app, load_snapshot

    if not config.model:
        raise InputError("serve needs --model <model.json>")
    snapshot = load_snapshot(
        config.model, config.two_slice or None, target=config.target or None
    )
    app = create_app(snapshot)
    uvicorn.run(app, host="127.0.0.1", port=config.port, log_level="warning")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="marketbn",
        description="Discrete Bayesian-network toolkit for daily market data",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--output-dir", dest="output_dir")
        p.add_argument("--seed", type=int)
        p.add_argument("--resamples", type=int)
        p.add_argument("--threshold", type=float)
        p.add_argument("--ess", type=float)
        p.add_argument("--target")
        p.add_argument("--max-in-degree", dest="max_in_degree", type=int)

    p = sub.add_parser("prep", help="filter prices and discretize residuals")
    add_common(p)
    p.add_argument("--input")
    p.add_argument("--tickers")
    p.add_argument("--max-lag", dest="max_lag", type=int)
    p.add_argument("--max-p", dest="max_p", type=int)
    p.add_argument("--max-q", dest="max_q", type=int)

    p = sub.add_parser("learn", help="learn the static network")
    add_common(p)
    p.add_argument(
        "--use-directed-frequency", dest="use_directed_frequency",
        action="store_const", const=True,
    )

    p = sub.add_parser("analyze", help="inference and sensitivity reports")
    add_common(p)
    p.add_argument("--model")
    p.add_argument("--top-k", dest="top_k", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument(
        "--include-neutral", dest="include_neutral",
        action="store_const", const=True,
    )
    p.add_argument(
        "--plain-mi", dest="mi_times_100", action="store_const", const=False,
        help="report mutual information unscaled",
    )

    p = sub.add_parser("dbn", help="learn the two-slice network")
    add_common(p)
    p.add_argument("--shock-nodes", dest="shock_nodes")
    p.add_argument(
        "--single-run", dest="single_run", action="store_const", const=True,
    )
    p.add_argument(
        "--use-directed-frequency", dest="use_directed_frequency",
        action="store_const", const=True,
    )

    p = sub.add_parser("serve", help="serve a model over HTTP")
    add_common(p)
    p.add_argument("--model")
    p.add_argument("--two-slice", dest="two_slice")
    p.add_argument("--port", type=int)

    p = sub.add_parser("export-dot", help="write DOT files for a model")
    add_common(p)
    p.add_argument("--model")

    return parser


COMMANDS = {
    "prep": cmd_prep,
    "learn": cmd_learn,
    "analyze": cmd_analyze,
    "dbn": cmd_dbn,
    "serve": cmd_serve,
    "export-dot": cmd_export_dot,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = build_config(args)
        COMMANDS[args.command](config)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FitError, ZeroProbabilityEvidenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
