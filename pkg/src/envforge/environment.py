"""Multi-agent environment: EPP sampling, simulator stepping, and the
glue -> done -> reward schedule, with space sanity checks and episode logging.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .agents import Agent, PolicyPool, attach_parts, build_agent
from .config.schema import EnvironmentConfig, EpisodeEndMode, SpaceCheckMode
from .config.serialize import environment_config_to_tree
from .epp import EpisodeParameterProvider, SampledParameters
from .functors.base import DoneResult, DoneStatusCode, EpisodeState, FunctorSpec
from .functors.graph import build_graph
from .parts import GLOBAL_REGISTRY
from .simulators import SIMULATORS, PlatformSetup, init_key
from .units import Quantity


class EnvironmentError_(Exception):
    pass


class EpisodeAlreadyDone(EnvironmentError_):
    def __init__(self):
        super().__init__("step() called after the episode ended; call reset()")


class SpaceViolation(EnvironmentError_):
    def __init__(self, agent: str, glue: str, element: int, value: float, low: float, high: float):
        self.agent = agent
        self.glue = glue
        super().__init__(
            f"observation out of bounds: agent '{agent}', glue '{glue}', "
            f"element {element}: value {value} outside [{low}, {high}]"
        )


@dataclass
class StepResult:
    observations: dict[str, dict[str, Quantity]]
    rewards: dict[str, float]
    dones: dict[str, bool]
    done_codes: dict[str, DoneStatusCode | None]
    env_done: bool
    truncated: bool
    info: dict = field(default_factory=dict)


class Environment:
    """Owns one simulator, its agents, and the per-step evaluation schedule."""

    def __init__(self, config: EnvironmentConfig, registry=GLOBAL_REGISTRY, policy_seed: int = 0):
        self.config = config
        self.registry = registry

        self.epp = EpisodeParameterProvider()
        for name, spec in config.reference_store.items():
            self.epp.add(spec)
        for platform in config.platforms:
            for pname, spec in platform.initialization.items():
                spec = _renamed(spec, init_key(platform.name, pname))
                self.epp.add(spec)
        for agent_cfg in config.agents:
            for spec in agent_cfg.reference_store.values():
                if spec.name not in self.epp:
                    self.epp.add(spec)
            for spec in agent_cfg.parameters.values():
                if spec.name not in self.epp:
                    self.epp.add(spec)

        setups = [
            PlatformSetup(p.name, p.platform_type, list(p.initialization))
            for p in config.platforms
        ]
        sim_cls = SIMULATORS[config.simulator_name]
        self.simulator = sim_cls(config.simulator_config, setups)

        # Priming reset so platforms exist for part attachment and glue wiring.
        priming = self.epp.sample_episode(seed=0)
        self.simulator.reset(priming)

        self.policy_pool = PolicyPool(seed=policy_seed)
        self.agents: dict[str, Agent] = {}
        for agent_cfg in config.agents:
            attach_parts(agent_cfg, self.simulator.platforms, sim_cls.simulator_type, registry)
            agent = build_agent(agent_cfg, self.simulator.platforms, self.policy_pool)
            self.agents[agent.name] = agent

        shared_specs = list(config.shared_dones)
        shared_specs.append(FunctorSpec(functor="EpisodeHorizon", name="EpisodeHorizon"))
        self.shared_graph = build_graph(
            dict(self.simulator.platforms), glues=[], shared_dones=shared_specs
        )

        self.state: EpisodeState | None = None
        self.trace: list[tuple[int, str]] = []  # (step, phase) instrumentation
        self._episode_index = -1
        self._episode_rows: list[dict] = []
        self._episodes: list[dict] = []  # finished episodes: {"rows": [...], "sampled": {...}}
        self._env_done = True
        self._truncated = False
        self._agent_done: dict[str, bool] = {}
        self._agent_code: dict[str, DoneResult | None] = {}
        self._check_rng = np.random.default_rng(0)
        self._epp_history: list[dict] = [self.epp.snapshot_state()]

    # Lifecycle ---------------------------------------------------------

    def reset(self, seed: int = 0, overrides: dict[str, Quantity] | None = None):
        sampled = self.epp.sample_episode(seed, overrides)
        self.simulator.reset(sampled)
        for agent in self.agents.values():
            agent.graph.reset()
        self.shared_graph.reset()

        self.state = EpisodeState(self.simulator.platforms, self.epp, self.config.horizon)
        self.state.sim_time = self.simulator.sim_time
        self._env_done = False
        self._truncated = False
        self._agent_done = {name: False for name in self.agents}
        self._agent_code = {name: None for name in self.agents}
        self._episode_index += 1
        self._episode_rows = []
        self._sampled = sampled
        self._check_rng = np.random.default_rng(seed)
        self.trace = []

        self._evaluate_glues()
        self._space_check()
        return self._collect_observations(self.agents.keys())

    def step(self, actions: dict[str, dict[str, np.ndarray]]) -> StepResult:
        if self.state is None or self._env_done:
            raise EpisodeAlreadyDone()
        state = self.state
        active = [name for name, done in self._agent_done.items() if not done]

        # (1) glues push actions to controllers
        for name in active:
            agent = self.agents[name]
            fragments = actions.get(name, {})
            for node in agent.graph.glues:
                if node.functor.action_space() is not None and node.name in fragments:
                    node.functor.apply_action(
                        np.atleast_1d(np.asarray(fragments[node.name], dtype=float)), state
                    )
        self.trace.append((state.step_count + 1, "apply_action"))

        # (2) simulator advances one frame
        self.simulator.step()
        state.step_count += 1
        state.sim_time = self.simulator.sim_time
        self.trace.append((state.step_count, "sim_step"))

        # (3) glues compute observations
        self._evaluate_glues()
        self.trace.append((state.step_count, "observe"))

        # (4) dones, including shared dones
        state.done_results = {name: {} for name in self.agents}
        state.shared_done_results = {}
        for name in active:
            agent = self.agents[name]
            for node in agent.graph.dones:
                result = node.functor.evaluate(state)
                if result is not None:
                    state.done_results[name][node.name] = result
                    if not self._agent_done[name]:
                        self._agent_done[name] = True
                        self._agent_code[name] = result
            # destruction of an owning platform ends the agent with LOSS
            if not self._agent_done[name]:
                for pname in agent.platform_names:
                    if pname not in self.simulator.platforms:
                        result = DoneResult(DoneStatusCode.LOSS)
                        state.done_results[name]["PlatformDestroyed"] = result
                        self._agent_done[name] = True
                        self._agent_code[name] = result
                        break
        shared_fired: DoneResult | None = None
        for node in self.shared_graph.shared_dones:
            result = node.functor.evaluate(state)
            if result is not None:
                state.shared_done_results[node.name] = result
                if shared_fired is None:
                    shared_fired = result
        self.trace.append((state.step_count, "dones"))

        # (5) rewards, with this step's done results visible
        components: dict[str, dict[str, float]] = {}
        rewards: dict[str, float] = {}
        for name in active:
            agent = self.agents[name]
            agent_dones = dict(state.done_results[name])
            agent_dones.update(state.shared_done_results)
            components[name] = {}
            for node in agent.graph.rewards:
                components[name][node.name] = float(
                    node.functor.evaluate(state, agent_dones)
                )
            rewards[name] = sum(components[name].values())
        self.trace.append((state.step_count, "rewards"))

        # (6) episode end policy
        if shared_fired is not None:
            for name in self.agents:
                if not self._agent_done[name]:
                    self._agent_done[name] = True
                    self._agent_code[name] = shared_fired
            self._env_done = True
            self._truncated = self._truncated or shared_fired.truncation
        elif self.config.episode_end_mode is EpisodeEndMode.ANY_AGENT_DONE:
            self._env_done = any(self._agent_done.values())
        else:
            self._env_done = all(self._agent_done.values())
        self._truncated = self._truncated or any(
            r.truncation for r in (self._agent_code[n] for n in active) if r is not None
        )

        # (7) observation space sanity checks
        self._space_check()

        state.agent_done = dict(self._agent_done)
        observations = self._collect_observations(active)
        result = StepResult(
            observations=observations,
            rewards=rewards,
            dones={name: self._agent_done[name] for name in active},
            done_codes={
                name: self._agent_code[name].code if self._agent_code[name] else None
                for name in active
            },
            env_done=self._env_done,
            truncated=self._truncated,
            info={
                "reward_components": components,
                "done_results": {
                    name: {k: r.code.value for k, r in state.done_results[name].items()}
                    for name in active
                },
                "shared_done_results": {
                    k: r.code.value for k, r in state.shared_done_results.items()
                },
            },
        )
        self._log_step(result)
        if self._env_done:
            self._episodes.append(
                {
                    "rows": self._episode_rows,
                    "sampled": {k: q.item for k, q in self._sampled.values.items()},
                    "index": self._episode_index,
                }
            )
        return result

    @property
    def episode_done(self) -> bool:
        return self._env_done

    @property
    def agent_done_codes(self) -> dict[str, DoneStatusCode | None]:
        return {n: (r.code if r else None) for n, r in self._agent_code.items()}

    def apply_training_result(self, result: dict | None = None) -> None:
        self.epp.apply_training_result(result)
        self._epp_history.append(self.epp.snapshot_state())

    # Schedule internals -------------------------------------------------

    def _evaluate_glues(self) -> None:
        state = self.state
        graphs = [agent.graph for agent in self.agents.values()] + [self.shared_graph]
        for graph in graphs:
            for node_id in graph.topo_order:
                node = graph.nodes[node_id]
                if node.kind == "glue":
                    state.observations[node.id] = node.functor.get_observation(state)

    def _collect_observations(self, agent_names) -> dict[str, dict[str, Quantity]]:
        out = {}
        for name in agent_names:
            agent = self.agents[name]
            obs = {}
            for node in agent.graph.glues:
                for key, value in self.state.observations[node.id].items():
                    obs[f"{node.name}/{key}"] = value
            out[name] = obs
        return out

    def _space_check(self) -> None:
        mode = self.config.space_check_mode
        if mode.mode == "off":
            return
        if mode.mode == "spot_check":
            self.spot_checks_attempted = getattr(self, "spot_checks_attempted", 0) + 1
            if self._check_rng.random() >= mode.probability:
                return
            self.spot_checks_run = getattr(self, "spot_checks_run", 0) + 1
        for name, agent in self.agents.items():
            for node in agent.graph.glues:
                spaces = node.functor.observation_space()
                obs = self.state.observations[node.id]
                for key, box in spaces.items():
                    values = obs[key].values
                    for i, v in enumerate(values):
                        if v < box.low[i] or v > box.high[i]:
                            raise SpaceViolation(name, node.name, i, float(v), float(box.low[i]), float(box.high[i]))

    def _log_step(self, result: StepResult) -> None:
        row: dict[str, object] = {"step": self.state.step_count}
        for agent, comps in result.info["reward_components"].items():
            for comp, value in comps.items():
                row[f"{agent}.reward.{comp}"] = value
            row[f"{agent}.reward_total"] = result.rewards[agent]
        for agent, code in result.done_codes.items():
            row[f"{agent}.done_code"] = code.value if code else ""
        for key, q in self._sampled.values.items():
            row[f"param.{key}"] = q.item
        self._episode_rows.append(row)

    # Logging -------------------------------------------------------------

    def write_episode_logs(self, out_dir: str | Path) -> list[Path]:
        """One CSV per finished episode plus a run_config.json snapshot."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written: list[Path] = []
        for episode in self._episodes:
            path = out_dir / f"episode_{episode['index']}.csv"
            rows = episode["rows"]
            columns: list[str] = ["step"]
            for row in rows:
                for key in row:
                    if key not in columns:
                        columns.append(key)
            with open(path, "w", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=columns)
                writer.writeheader()
                writer.writerows(rows)
            written.append(path)

        config_path = out_dir / "run_config.json"
        snapshot = {
            "environment": environment_config_to_tree(self.config),
            "epp_state_per_iteration": self._epp_history,
        }
        with open(config_path, "w") as fh:
            json.dump(snapshot, fh, indent=2, sort_keys=True)
        written.append(config_path)
        return written


def _renamed(spec, new_name):
    from dataclasses import replace

    return replace(spec, name=new_name)
