"""Read-only HTTP facade over a loaded model for the what-if UI."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from . import reports
from .dbn import TwoSliceNetwork, load_two_slice, temporal_query
from .errors import InputError, ZeroProbabilityEvidenceError
from .graph import _pair, cpdag
from .inference import mpe, posterior
from .model import BayesianNetwork, load_network
from .sensitivity import arc_diameter, sensitivity_report, tornado


@dataclass(eq=False)
class ModelSnapshot:
    """Immutable view of a loaded model plus precomputed query results.

    The sensitivity cache only memoizes pure recomputations, so a snapshot
    never changes observable behavior after load.
    """

    model: BayesianNetwork
    two_slice: TwoSliceNetwork | None = None
    target: str | None = None
    baselines: dict = field(default_factory=dict)
    diameters: dict = field(default_factory=dict)
    undirected_pairs: frozenset = frozenset()
    _sensitivity_cache: dict = field(default_factory=dict)
    _tornado_cache: dict = field(default_factory=dict)

    def sensitivity_for(self, target: str):
        if target not in self._sensitivity_cache:
            self._sensitivity_cache[target] = sensitivity_report(
                self.model, target
            )
        return self._sensitivity_cache[target]

    def tornado_for(self, target: str, state: str, top_k: int):
        key = (target, state, top_k)
        if key not in self._tornado_cache:
            self._tornado_cache[key] = tornado(
                self.model, target, state, top_k
            )
        return self._tornado_cache[key]


def build_snapshot(
    model: BayesianNetwork,
    two_slice: TwoSliceNetwork | None = None,
    *,
    target: str | None = None,
) -> ModelSnapshot:
    if target is not None and target not in set(model.dag.nodes):
        raise InputError(f"unknown target {target!r}")
    baselines = {
        node: posterior(model, node, {}) for node in model.dag.nodes
    }
    diameters = {e: arc_diameter(model, e) for e in sorted(model.dag.edges)}
    pdag = cpdag(model.dag)
    snapshot = ModelSnapshot(
        model=model,
        two_slice=two_slice,
        target=target,
        baselines=baselines,
        diameters=diameters,
        undirected_pairs=frozenset(pdag.undirected),
    )
    if target is not None:
        snapshot.sensitivity_for(target)
    return snapshot


def load_snapshot(
    model_path,
    two_slice_path=None,
    *,
    target: str | None = None,
) -> ModelSnapshot:
    model = load_network(model_path)
    two_slice = load_two_slice(two_slice_path) if two_slice_path else None
    return build_snapshot(model, two_slice, target=target)


def _json_response(payload, status_code: int = 200) -> Response:
    """Same byte layout as the files the pipeline writes."""
    return Response(
        content=json.dumps(payload, indent=2, sort_keys=True) + "\n",
        status_code=status_code,
        media_type="application/json",
    )


def _error(status_code: int, message: str) -> Response:
    return _json_response({"detail": message}, status_code)


def _network_payload(snapshot: ModelSnapshot) -> dict:
    net = snapshot.model
    return {
        "nodes": [
            {
                "name": n,
                "states": list(net.states(n)),
                "baseline": [float(p) for p in snapshot.baselines[n].distribution],
            }
            for n in net.dag.nodes
        ],
        "edges": [
            {
                "parent": a,
                "child": b,
                "diameter": float(snapshot.diameters[(a, b)]),
                "undirected_in_cpdag": _pair(a, b) in snapshot.undirected_pairs,
            }
            for a, b in sorted(net.dag.edges)
        ],
        "target": snapshot.target,
        "has_two_slice": snapshot.two_slice is not None,
    }


def _validate_payload_evidence(net: BayesianNetwork, evidence) -> dict:
    if not isinstance(evidence, Mapping):
        raise InputError("evidence must be an object of node: state pairs")
    nodes = set(net.dag.nodes)
    for node, state in evidence.items():
        if node not in nodes:
            raise InputError(f"unknown evidence node {node!r}")
        if state not in net.states(node):
            raise InputError(f"{state!r} is not a state of {node!r}")
    return dict(evidence)


def create_app(snapshot: ModelSnapshot | None = None) -> FastAPI:
    """Service over one snapshot; replace ``app.state.snapshot`` to reload."""
    app = FastAPI(title="marketbn", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.snapshot = snapshot

    def current() -> ModelSnapshot | None:
        return app.state.snapshot

    @app.get("/v1/network")
    def network() -> Response:
        snap = current()
        if snap is None:
            return _error(503, "no model loaded")
        return _json_response(_network_payload(snap))

    @app.post("/v1/query")
    async def query(request: Request) -> Response:
        snap = current()
        if snap is None:
            return _error(503, "no model loaded")
        try:
            payload = await request.json()
        except json.JSONDecodeError:
            return _error(400, "request body is not valid JSON")
        if not isinstance(payload, dict):
            return _error(400, "request body must be a JSON object")
        slice_name = payload.get("slice", "static")
        target = payload.get("target")
        try:
            if slice_name == "static":
                evidence = _validate_payload_evidence(
                    snap.model, payload.get("evidence", {})
                )
                if not isinstance(target, str):
                    raise InputError("query needs a target node name")
                report = posterior(snap.model, target, evidence)
                return _json_response(reports.posterior_to_dict(report))
            if slice_name == "temporal":
                if snap.two_slice is None:
                    return _error(503, "no two-slice model loaded")
                evidence = _validate_payload_evidence(
                    snap.two_slice.static_net, payload.get("evidence", {})
                )
                if not isinstance(target, str):
                    raise InputError("query needs a target node name")
                at_t, at_t1 = temporal_query(snap.two_slice, evidence, target)
                return _json_response(reports.temporal_to_dict(at_t, at_t1))
            raise InputError(f"unknown slice {slice_name!r}")
        except ZeroProbabilityEvidenceError as exc:
            return _error(422, str(exc))
        except InputError as exc:
            return _error(400, str(exc))

    @app.post("/v1/mpe")
    async def mpe_endpoint(request: Request) -> Response:
        snap = current()
        if snap is None:
            return _error(503, "no model loaded")
        try:
            payload = await request.json()
        except json.JSONDecodeError:
            return _error(400, "request body is not valid JSON")
        if not isinstance(payload, dict):
            return _error(400, "request body must be a JSON object")
        try:
            evidence = _validate_payload_evidence(
                snap.model, payload.get("evidence", {})
            )
            result = mpe(snap.model, evidence)
            return _json_response(reports.mpe_to_dict(result))
        except ZeroProbabilityEvidenceError as exc:
            return _error(422, str(exc))
        except InputError as exc:
            return _error(400, str(exc))

    @app.get("/v1/sensitivity")
    def sensitivity_endpoint(target: str = "") -> Response:
        snap = current()
        if snap is None:
            return _error(503, "no model loaded")
        name = target or snap.target
        if not name:
            return _error(400, "sensitivity needs a target node")
        try:
            report = snap.sensitivity_for(name)
        except InputError as exc:
            return _error(400, str(exc))
        return _json_response(reports.sensitivity_to_dict(report))

    @app.get("/v1/tornado")
    def tornado_endpoint(
        target: str = "", state: str = "", top_k: int = 20
    ) -> Response:
        snap = current()
        if snap is None:
            return _error(503, "no model loaded")
        name = target or snap.target
        if not name:
            return _error(400, "tornado needs a target node")
        if not state:
            return _error(400, "tornado needs a target state")
        try:
            entries = snap.tornado_for(name, state, top_k)
        except InputError as exc:
            return _error(400, str(exc))
        return _json_response(
            {
                "target": name,
                "state": state,
                "entries": reports.tornado_entries_to_dicts(entries),
            }
        )

    return app
