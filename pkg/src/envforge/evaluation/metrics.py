"""Generate Metrics stage: composable metric functors over stored trajectories.

Metrics follow the same functor pattern as glues/rewards/dones: registered by
name, configured declaratively, and composable (a metric may consume other
metrics' outputs).  Each result is tagged terminal (non-container value) or
non_terminal (container), so non-Python visualizers can filter by kind.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .artifact import EpisodeArtifact, load_artifacts

TERMINAL = "terminal"
NON_TERMINAL = "non_terminal"


class MetricError(Exception):
    pass


class UnknownMetricInput(MetricError):
    def __init__(self, metric: str, input_name: str):
        super().__init__(f"metric '{metric}' consumes undefined metric '{input_name}'")


class MetricCycle(MetricError):
    def __init__(self, names: list[str]):
        super().__init__(f"metric dependency cycle: {' -> '.join(names)}")


class UnknownMetric(MetricError):
    def __init__(self, name: str):
        super().__init__(f"no metric registered under '{name}'")


@dataclass(frozen=True)
class MetricValue:
    kind: str  # terminal | non_terminal
    value: object


MetricFn = Callable[[list[EpisodeArtifact], dict[str, MetricValue], dict], MetricValue]

METRIC_REGISTRY: dict[str, MetricFn] = {}


def register_metric(name: str, fn: MetricFn) -> None:
    METRIC_REGISTRY[name] = fn


def _is_win(artifact: EpisodeArtifact, agent: str | None) -> bool:
    outcomes = artifact.final_outcome
    if agent is not None:
        return outcomes.get(agent) == "WIN"
    return bool(outcomes) and all(code == "WIN" for code in outcomes.values())


def _success_count(artifacts, inputs, config):
    agent = config.get("agent")
    return MetricValue(TERMINAL, sum(1 for a in artifacts if _is_win(a, agent)))


def _success_rate(artifacts, inputs, config):
    total = len(artifacts)
    if "count" in inputs:
        count = inputs["count"].value
    else:
        count = sum(1 for a in artifacts if _is_win(a, config.get("agent")))
    return MetricValue(TERMINAL, count / total if total else 0.0)


def _episode_length(artifacts, inputs, config):
    return MetricValue(NON_TERMINAL, {a.case_id: len(a.steps) for a in artifacts})


def _total_reward(artifacts, inputs, config):
    out = {}
    for artifact in artifacts:
        totals: dict[str, float] = {}
        for step in artifact.steps:
            for agent, value in step.reward_totals.items():
                totals[agent] = totals.get(agent, 0.0) + value
        out[artifact.case_id] = totals
    return MetricValue(NON_TERMINAL, out)


def _reward_component_proportions(artifacts, inputs, config):
    totals: dict[str, float] = {}
    for artifact in artifacts:
        for step in artifact.steps:
            for agent, components in step.rewards.items():
                for component, value in components.items():
                    key = f"{agent}.{component}"
                    totals[key] = totals.get(key, 0.0) + value
    grand = sum(totals.values())
    proportions = {k: (v / grand if grand else 0.0) for k, v in totals.items()}
    return MetricValue(NON_TERMINAL, proportions)


def _done_code_histogram(artifacts, inputs, config):
    histogram: dict[str, int] = {}
    for artifact in artifacts:
        for code in artifact.final_outcome.values():
            key = code or "NONE"
            histogram[key] = histogram.get(key, 0) + 1
    return MetricValue(NON_TERMINAL, histogram)


def _mean_of(artifacts, inputs, config):
    """Terminal mean over a non_terminal container metric (metric-over-metric)."""
    source = inputs["source"].value
    values = list(source.values()) if isinstance(source, dict) else list(source)
    flat: list[float] = []
    for v in values:
        if isinstance(v, dict):
            flat.extend(float(x) for x in v.values())
        else:
            flat.append(float(v))
    return MetricValue(TERMINAL, sum(flat) / len(flat) if flat else 0.0)


register_metric("success_count", _success_count)
register_metric("success_rate", _success_rate)
register_metric("episode_length", _episode_length)
register_metric("total_reward", _total_reward)
register_metric("reward_component_proportions", _reward_component_proportions)
register_metric("done_code_histogram", _done_code_histogram)
register_metric("mean_of", _mean_of)


@dataclass
class MetricSpec:
    name: str
    metric: str
    config: dict
    inputs: dict[str, str]  # role -> producing metric name


def parse_metric_config(tree) -> list[MetricSpec]:
    specs = []
    for entry in tree.get("metrics", []):
        specs.append(
            MetricSpec(
                name=str(entry["name"]),
                metric=str(entry.get("metric", entry["name"])),
                config=entry.get("config", {}),
                inputs={str(k): str(v) for k, v in entry.get("inputs", {}).items()},
            )
        )
    return specs


def generate_metrics(
    artifacts: list[EpisodeArtifact] | str | Path,
    specs: list[MetricSpec],
) -> dict[str, MetricValue]:
    """Evaluate metrics in dependency (topological) order."""
    if not isinstance(artifacts, list):
        artifacts = load_artifacts(artifacts)
    by_name = {spec.name: spec for spec in specs}
    computed: dict[str, MetricValue] = {}
    visiting: list[str] = []

    def resolve(name: str) -> MetricValue:
        if name in computed:
            return computed[name]
        if name in visiting:
            raise MetricCycle(visiting + [name])
        spec = by_name[name]
        if spec.metric not in METRIC_REGISTRY:
            raise UnknownMetric(spec.metric)
        visiting.append(name)
        try:
            inputs = {}
            for role, producer in spec.inputs.items():
                if producer not in by_name:
                    raise UnknownMetricInput(name, producer)
                inputs[role] = resolve(producer)
            computed[name] = METRIC_REGISTRY[spec.metric](artifacts, inputs, spec.config)
        finally:
            visiting.pop()
        return computed[name]

    for spec in specs:
        resolve(spec.name)
    return computed


def write_metrics(metrics: dict[str, MetricValue], path: str | Path) -> Path:
    path = Path(path)
    document = {
        name: {"kind": mv.kind, "value": mv.value} for name, mv in metrics.items()
    }
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n")
    return path


def read_metrics(path: str | Path) -> dict[str, MetricValue]:
    document = json.loads(Path(path).read_text())
    return {name: MetricValue(entry["kind"], entry["value"]) for name, entry in document.items()}
