"""Replay of the RIC control loop over recorded demand series.

Roles and message flow:

* RAN -> non-RT RIC: ``O1Telemetry`` carries every sample observed so far.
* non-RT RIC: grid search and model selection per network, demand statistics
  from the selected model's walk-forward predictions, sent as ``A1Policy``.
* near-RT RIC: solves the allocation from the latest policy and configures the
  RAN with ``E2Allocation``, scored against the demand that actually arrives.

The first ``warmup`` samples are history only.  Epoch ``e`` corresponds to
sample index ``warmup + e``; a policy issued at epoch ``e`` sees samples
``[0, warmup + e)``.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .allocate import (
    AllocationProblem,
    AllocationResult,
    DemandStats,
    Variant,
    evaluate,
    solve,
    stats_from_series,
)
from .forecast import ModelSpec, SplitConfig, grid_search, select_model
from .ingest import PrbSeries
from .seeding import derive_seed

O1 = "O1Telemetry"
A1 = "A1Policy"
E2 = "E2Allocation"
MESSAGE_KINDS = (O1, A1, E2)
LOOP_VARIANTS = ("max", "avg", "autofairest")
NETWORKS = ("lte", "nr")


class ControlError(ValueError):
    pass


@dataclass(frozen=True)
class ControlMessage:
    kind: str
    epoch: int
    payload: dict

    def __post_init__(self):
        if self.kind not in MESSAGE_KINDS:
            raise ControlError(f"unknown message kind {self.kind!r}")
        if self.epoch < 0:
            raise ControlError("epoch must be >= 0")

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind, "epoch": self.epoch, "payload": self.payload},
                          sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "ControlMessage":
        d = json.loads(line)
        return cls(kind=d["kind"], epoch=int(d["epoch"]), payload=d["payload"])


@dataclass(frozen=True)
class LoopConfig:
    retrain_every: int
    allocate_every: int
    pool_size: float
    gamma: float
    variant: str = "autofairest"
    grid: Sequence[ModelSpec] = ()
    seed: int = 0
    grid_nr: Sequence[ModelSpec] = ()  # empty: NR uses ``grid`` too
    warmup: int = 20
    split: SplitConfig = field(default_factory=SplitConfig)
    integer_mode: bool = True
    use_observed_stats: bool = False

    def __post_init__(self):
        if not self.retrain_every >= self.allocate_every >= 1:
            raise ControlError("need retrain_every >= allocate_every >= 1")
        if not 0 < self.gamma < 1:
            raise ControlError("gamma must lie strictly inside (0, 1)")
        if not self.pool_size > 0:
            raise ControlError("pool_size must be positive")
        if str(self.variant).lower() not in LOOP_VARIANTS:
            raise ControlError(f"variant must be one of {LOOP_VARIANTS}")
        if not self.grid:
            raise ControlError("model grid is empty")
        if self.warmup < 20:
            raise ControlError("warmup must be >= 20 samples")


@dataclass
class Transcript:
    messages: list

    def of_kind(self, kind: str) -> list:
        return [m for m in self.messages if m.kind == kind]

    def to_jsonl(self) -> str:
        return "".join(m.to_json() + "\n" for m in self.messages)

    def write(self, path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")

    @classmethod
    def read(cls, path) -> "Transcript":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls([ControlMessage.from_json(line) for line in lines if line.strip()])


def _seeded_grid(grid, root_seed: int, network: str):
    return [ModelSpec(s.kind, dict(s.params), derive_seed(root_seed, network, s.label(), s.seed))
            for s in grid]


def compute_policy(telemetry: dict, config: LoopConfig) -> dict:
    """Non-RT RIC step: model selection and demand statistics from one O1 payload."""
    policy = {"gamma": config.gamma}
    for net in NETWORKS:
        history = np.asarray(telemetry[net], dtype=float)
        grid = config.grid_nr if (net == "nr" and config.grid_nr) else config.grid
        ranked = grid_search(history, _seeded_grid(grid, config.seed, net), config.split)
        spec = select_model(ranked)
        best = ranked[0]
        source = best.observed if config.use_observed_stats else best.predictions
        try:
            stats = stats_from_series(source)
        except ValueError as exc:
            raise ControlError(f"{net}: cannot derive demand statistics ({exc})") from None
        policy[net] = {"model": spec.to_dict(), "rmse": best.rmse, "stats": stats.to_dict(),
                       "failures": len(ranked.failures)}
    return policy


def allocate_from_policy(policy: dict, config: LoopConfig) -> tuple[AllocationProblem, AllocationResult, dict]:
    """Near-RT RIC step.  ``autofairest`` keeps the fairer variant, avg on ties."""
    stats_a = DemandStats.from_dict(policy["lte"]["stats"])
    stats_b = DemandStats.from_dict(policy["nr"]["stats"])
    mode = str(config.variant).lower()
    variants = [Variant.MAX, Variant.AVG] if mode == "autofairest" else [Variant.parse(mode)]
    solved = {}
    for v in variants:
        prob = AllocationProblem(config.pool_size, policy["gamma"], stats_a, stats_b, v, config.integer_mode)
        solved[v] = (prob, solve(prob))
    if mode == "autofairest":
        f_max = solved[Variant.MAX][1].fairness
        f_avg = solved[Variant.AVG][1].fairness
        chosen = Variant.MAX if f_max > f_avg else Variant.AVG
    else:
        chosen = variants[0]
    fairness = {v.value: r.fairness for v, (_, r) in solved.items()}
    prob, res = solved[chosen]
    return prob, res, fairness


def _check_inputs(lte: PrbSeries, nr: PrbSeries, config: LoopConfig):
    if len(lte) != len(nr):
        raise ControlError(f"series lengths differ: {len(lte)} vs {len(nr)}")
    if lte.granularity_ms != nr.granularity_ms:
        raise ControlError("series granularities differ")
    if len(lte) < 20:
        raise ControlError("series must hold at least 20 samples")
    if len(lte) <= config.warmup:
        raise ControlError(f"series of {len(lte)} samples leaves no epochs after warmup {config.warmup}")


def run_loop(lte: PrbSeries, nr: PrbSeries, config: LoopConfig) -> Transcript:
    _check_inputs(lte, nr, config)
    a, b = lte.as_array(), nr.as_array()
    n_epochs = len(a) - config.warmup
    messages = []
    policy: Optional[dict] = None
    for e in range(n_epochs):
        t = config.warmup + e
        if e % config.retrain_every == 0:
            telemetry = {"lte": a[:t].tolist(), "nr": b[:t].tolist(), "through_index": t}
            messages.append(ControlMessage(O1, e, telemetry))
            policy = compute_policy(telemetry, config)
            messages.append(ControlMessage(A1, e, policy))
        if e % config.allocate_every == 0:
            prob, res, fairness = allocate_from_policy(policy, config)
            stop = min(t + config.allocate_every, len(a))
            rec = evaluate(prob, res, a[t:stop], b[t:stop])
            payload = {"allocation": res.to_dict(), "policy_epoch": e - e % config.retrain_every,
                       "window": [t, stop], "fairness_by_variant": fairness,
                       "evaluation": rec.to_dict()}
            messages.append(ControlMessage(E2, e, payload))
    return Transcript(messages)


def verify_causality(transcript: Transcript, config: LoopConfig) -> list[str]:
    """Recompute each A1 policy from the preceding O1 payload alone.

    Returns a list of problems; empty means every policy is reproduced and
    used only samples from before its epoch.
    """
    problems = []
    last_o1 = None
    for msg in transcript.messages:
        if msg.kind == O1:
            last_o1 = msg
            expected = config.warmup + msg.epoch
            if msg.payload["through_index"] != expected or len(msg.payload["lte"]) != expected:
                problems.append(f"epoch {msg.epoch}: telemetry covers {len(msg.payload['lte'])} samples, "
                                f"expected {expected}")
        elif msg.kind == A1:
            if last_o1 is None or last_o1.epoch != msg.epoch:
                problems.append(f"epoch {msg.epoch}: policy without same-epoch telemetry")
                continue
            again = json.loads(json.dumps(compute_policy(last_o1.payload, config)))
            if again != json.loads(json.dumps(msg.payload)):
                problems.append(f"epoch {msg.epoch}: policy not reproducible from telemetry")
    return problems


def transcript_report(transcript: Transcript) -> dict:
    if not transcript.messages:
        raise ControlError("empty transcript")
    allocs = transcript.of_kind(E2)
    if not allocs:
        raise ControlError("transcript holds no allocations")
    evals = [m.payload["evaluation"] for m in allocs]
    counts = Counter(m.kind for m in transcript.messages)
    models = {net: Counter() for net in NETWORKS}
    for m in transcript.of_kind(A1):
        for net in NETWORKS:
            spec = ModelSpec.from_dict(m.payload[net]["model"])
            models[net][f"{spec.kind}{json.dumps(spec.params, sort_keys=True)}"] += 1
    fair = [e["fairness"] for e in evals]
    return {
        "allocations": len(evals),
        "mean_surplus_a": float(np.mean([e["surplus_a"] for e in evals])),
        "mean_surplus_b": float(np.mean([e["surplus_b"] for e in evals])),
        "mean_fairness": float(np.mean(fair)) if all(map(math.isfinite, fair)) else float("nan"),
        "mean_n_a": float(np.mean([e["n_a"] for e in evals])),
        "mean_n_b": float(np.mean([e["n_b"] for e in evals])),
        "message_counts": {k: counts.get(k, 0) for k in MESSAGE_KINDS},
        "selected_models": {net: dict(sorted(models[net].items())) for net in NETWORKS},
        "variants": dict(sorted(Counter(e["variant"] for e in evals).items())),
    }
