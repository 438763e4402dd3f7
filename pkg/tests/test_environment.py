import copy
import json

import numpy as np
import pytest

from envforge.config.validate import validate_environment, validate_environment_file
from envforge.environment import Environment, EpisodeAlreadyDone, SpaceViolation
from envforge.functors.base import DoneStatusCode
from envforge.units import METER, Quantity

from conftest import CONFIG_DIR


def docking_tree(
    horizon=50,
    end_mode="any_agent_done",
    space_check="every_step",
    agents=1,
    policy=None,
    x0=-10.0,
    extra_glues=None,
    dones=True,
):
    agent_trees = []
    for i in range(agents):
        agent_trees.append(
            {
                "agent": f"agent_{i}",
                "platforms": ["deputy"],
                "parts": [
                    {"part": "Sensor_Position"},
                    {"part": "Sensor_Velocity"},
                    {"part": "Controller_Thrust", "config": {"thrust_limit": 1.0}},
                ],
                "glues": [
                    {
                        "functor": "ObserveSensor",
                        "name": "ObservePosition",
                        "config": {"sensor": "Sensor_Position", "normalize": False},
                    },
                    {
                        "functor": "ObserveSensor",
                        "name": "ObserveVelocity",
                        "config": {"sensor": "Sensor_Velocity", "normalize": False},
                    },
                    {
                        "functor": "ControllerGlue",
                        "name": "ThrustControl",
                        "config": {"controller": "Controller_Thrust"},
                    },
                ]
                + (copy.deepcopy(extra_glues) or []),
                "dones": (
                    [
                        {
                            "functor": "DockingSuccess",
                            "name": "DockingSuccess",
                            "references": {"dock_radius": "dock_radius", "velocity_limit": "v_max"},
                        },
                        {
                            "functor": "DockingFailure",
                            "name": "DockingFailure",
                            "references": {"dock_radius": "dock_radius", "velocity_limit": "v_max"},
                        },
                    ]
                    if dones
                    else []
                ),
                "rewards": [
                    {
                        "functor": "ExponentialDecayFromTargetValue",
                        "name": "DistanceShaping",
                        "config": {"eps": 5.0},
                        "extractor": {"glue": "ObservePosition", "key": "direct_observation"},
                    },
                    {
                        "functor": "DoneStatusReward",
                        "name": "OutcomeReward",
                        "config": {"win": 10.0, "loss": -10.0},
                    },
                ],
                "policy": policy or {"name": "scripted", "config": {"rule": "bang_bang_docking"}},
            }
        )
    return {
        "simulator": {"name": "Docking1dSimulator", "config": {"frame_rate": 1.0, "mass": 1.0}},
        "platforms": [
            {
                "name": "deputy",
                "platform_type": "Docking1dPlatform",
                "initialization": {
                    "x0": {"distribution": {"kind": "constant", "value": x0}, "unit": "meter"},
                    "v0": {
                        "distribution": {"kind": "constant", "value": 0.0},
                        "unit": "meter_per_second",
                    },
                },
            }
        ],
        "agents": agent_trees,
        "horizon": horizon,
        "episode_end_mode": end_mode,
        "space_check_mode": space_check,
        "reference_store": {
            "dock_radius": {"distribution": {"kind": "constant", "value": 0.1}, "unit": "meter"},
            "v_max": {
                "distribution": {"kind": "constant", "value": 0.2},
                "unit": "meter_per_second",
            },
        },
    }


def make_env(**kwargs):
    config, report = validate_environment(docking_tree(**kwargs))
    assert config is not None, str(report)
    return Environment(config)


def run_episode(env, seed=0, max_steps=10_000):
    observations = env.reset(seed=seed)
    results = []
    while not env.episode_done and len(results) < max_steps:
        actions = {
            name: agent.policy.compute_action(observations.get(name, {}), agent.action_space())
            for name, agent in env.agents.items()
        }
        result = env.step(actions)
        results.append(result)
        observations = result.observations
    return results


class TestStepSchedule:
    PHASES = ["apply_action", "sim_step", "observe", "dones", "rewards"]

    def test_phase_order_over_100_steps(self):
        # Instrumented trace: within every step dones come strictly before
        # rewards, and the full schedule is in declared order.
        env = make_env(horizon=200, x0=-500.0)
        run_episode(env, max_steps=100)
        by_step = {}
        for step, phase in env.trace:
            by_step.setdefault(step, []).append(phase)
        assert len(by_step) >= 100
        for phases in by_step.values():
            assert phases == self.PHASES
            assert phases.index("dones") < phases.index("rewards")

    def test_rewards_see_same_step_done_results(self):
        # The OutcomeReward pays 10.0 on the exact step DockingSuccess fires.
        env = make_env(horizon=300)
        results = run_episode(env)
        final = results[-1]
        assert final.done_codes["agent_0"] is DoneStatusCode.WIN
        assert final.info["reward_components"]["agent_0"]["OutcomeReward"] == 10.0

    def test_reward_is_exact_component_sum(self):
        env = make_env(horizon=300)
        for result in run_episode(env):
            for agent, total in result.rewards.items():
                assert total == sum(result.info["reward_components"][agent].values())

    def test_step_after_done_raises(self):
        env = make_env(horizon=5, dones=False, policy={"name": "scripted", "config": {"rule": "zero"}})
        run_episode(env)
        with pytest.raises(EpisodeAlreadyDone):
            env.step({})

    def test_observations_refreshed_after_sim_step(self):
        env = make_env(horizon=10, x0=-10.0, policy={"name": "scripted", "config": {"rule": "zero"}})
        obs = env.reset(seed=0)
        assert obs["agent_0"]["ObservePosition/direct_observation"].item == -10.0
        env.agents["agent_0"].graph.by_name["ThrustControl"]
        result = env.step({"agent_0": {"ThrustControl": np.array([1.0])}})
        # One 1 N / 1 kg step from rest moves 0.5 m.
        assert result.observations["agent_0"]["ObservePosition/direct_observation"].item == -9.5


class TestEpisodeEnd:
    def test_horizon_draw_and_truncation(self):
        env = make_env(horizon=7, dones=False, policy={"name": "scripted", "config": {"rule": "zero"}})
        results = run_episode(env)
        assert len(results) == 7
        final = results[-1]
        assert final.env_done and final.truncated
        assert final.done_codes["agent_0"] is DoneStatusCode.DRAW
        assert "EpisodeHorizon" in final.info["shared_done_results"]

    def test_win_is_not_truncation(self):
        env = make_env(horizon=300)
        final = run_episode(env)[-1]
        assert final.done_codes["agent_0"] is DoneStatusCode.WIN
        assert not final.truncated

    def test_any_agent_done_ends_episode(self):
        env = make_env(agents=2, end_mode="any_agent_done", horizon=300)
        final = run_episode(env)[-1]
        assert final.env_done

    def test_all_agents_done_waits_for_everyone(self):
        # Both agents share the platform and the same done criteria, so they
        # finish together; the point is that the mode is exercised end to end.
        env = make_env(agents=2, end_mode="all_agents_done", horizon=300)
        final = run_episode(env)[-1]
        assert final.env_done
        assert all(final.dones.values())

    def test_shared_done_ends_episode_for_all(self):
        env = make_env(
            agents=2, end_mode="all_agents_done", horizon=5, dones=False,
            policy={"name": "scripted", "config": {"rule": "zero"}},
        )
        final = run_episode(env)[-1]
        assert final.env_done
        assert env.agent_done_codes["agent_0"] is DoneStatusCode.DRAW
        assert env.agent_done_codes["agent_1"] is DoneStatusCode.DRAW


class TestDeterminism:
    def run_and_log(self, tmp_path, tag):
        env = make_env(horizon=300)
        for i in range(3):
            run_episode(env, seed=7 + i)
        out = tmp_path / tag
        env.write_episode_logs(out)
        return {p.name: p.read_bytes() for p in sorted(out.iterdir())}

    def test_identical_runs_identical_logs(self, tmp_path):
        assert self.run_and_log(tmp_path, "a") == self.run_and_log(tmp_path, "b")

    def test_seed_changes_episode(self):
        env = make_env(
            horizon=20, dones=False, policy={"name": "random"}, space_check="off"
        )
        first = [r.rewards["agent_0"] for r in run_episode(env, seed=1)]
        env2 = make_env(
            horizon=20, dones=False, policy={"name": "random"}, space_check="off"
        )
        second = [r.rewards["agent_0"] for r in run_episode(env2, seed=1)]
        assert first == second

    def test_reset_overrides(self):
        env = make_env()
        obs = env.reset(seed=0, overrides={"deputy.x0": Quantity.scalar(-42.0, METER)})
        assert obs["agent_0"]["ObservePosition/direct_observation"].item == -42.0


class TestSpaceChecks:
    def bounded_tvd_glue(self, low, high):
        return [
            {
                "functor": "TargetValueDifference",
                "name": "BoundedDelta",
                "config": {"index": 0, "unit": "N/A", "min": low, "max": high},
                "wrapped": {"sensor": "ObservePosition"},
            }
        ]

    def test_violation_identifies_agent_and_glue(self):
        # -x0 = 10 exceeds the declared [-5, 5] observation box immediately.
        tree = docking_tree(extra_glues=self.bounded_tvd_glue(-5.0, 5.0))
        config, report = validate_environment(tree)
        assert config is not None, str(report)
        env = Environment(config)
        with pytest.raises(SpaceViolation) as excinfo:
            env.reset(seed=0)
        assert excinfo.value.agent == "agent_0"
        assert excinfo.value.glue == "BoundedDelta"

    def test_off_mode_skips_checks(self):
        tree = docking_tree(space_check="off", extra_glues=self.bounded_tvd_glue(-5.0, 5.0))
        config, _ = validate_environment(tree)
        env = Environment(config)
        env.reset(seed=0)  # no raise

    def test_spot_check_rate(self):
        # Over ~10k checks a p=0.01 spot check runs np +- 3 sqrt(np(1-p)) times.
        tree = docking_tree(
            horizon=20_000,
            dones=False,
            space_check={"spot_check": 0.01},
            policy={"name": "scripted", "config": {"rule": "zero"}},
            x0=-1000.0,
        )
        config, report = validate_environment(tree)
        assert config is not None, str(report)
        env = Environment(config)
        env.reset(seed=0)
        for _ in range(10_000):
            env.step({"agent_0": {"ThrustControl": np.array([0.0])}})
        n, p = env.spot_checks_attempted, 0.01
        sigma = (n * p * (1 - p)) ** 0.5
        assert abs(env.spot_checks_run - n * p) < 3 * sigma


class TestLogging:
    def test_episode_csv_columns_and_rows(self, tmp_path):
        env = make_env(horizon=300)
        results = run_episode(env, seed=0)
        paths = env.write_episode_logs(tmp_path)
        csv_path = tmp_path / "episode_0.csv"
        assert csv_path in paths
        lines = csv_path.read_text().splitlines()
        header = lines[0].split(",")
        assert "step" in header
        assert "agent_0.reward.DistanceShaping" in header
        assert "agent_0.reward.OutcomeReward" in header
        assert "agent_0.reward_total" in header
        assert "agent_0.done_code" in header
        assert "param.deputy.x0" in header
        assert len(lines) - 1 == len(results)
        assert lines[-1].split(",")[header.index("agent_0.done_code")] == "WIN"

    def test_run_config_snapshot_revalidates(self, tmp_path):
        env = make_env()
        run_episode(env)
        env.apply_training_result()
        env.write_episode_logs(tmp_path)
        snapshot = json.loads((tmp_path / "run_config.json").read_text())
        reparsed, report = validate_environment(snapshot["environment"])
        assert reparsed is not None, str(report)
        assert len(snapshot["epp_state_per_iteration"]) == 2

    def test_one_csv_per_episode(self, tmp_path):
        env = make_env(horizon=300)
        for i in range(3):
            run_episode(env, seed=i)
        env.write_episode_logs(tmp_path)
        names = {p.name for p in tmp_path.iterdir()}
        assert {"episode_0.csv", "episode_1.csv", "episode_2.csv", "run_config.json"} <= names


class TestConfigFiles:
    def test_docking_file_runs_to_win(self, docking_config):
        env = Environment(docking_config)
        final = run_episode(env, seed=0)[-1]
        assert final.done_codes["deputy_agent"] is DoneStatusCode.WIN

    def test_cartpole_file_runs_to_completion(self, cartpole_config):
        env = Environment(cartpole_config)
        final = run_episode(env, seed=0)[-1]
        assert final.env_done
        assert env.agent_done_codes["cartpole_agent"] in {
            DoneStatusCode.LOSS,
            DoneStatusCode.DRAW,
        }

    def test_simulator_swap_same_group_name(self):
        # Sensor_State resolves per simulator through the plugin registry.
        for task in ("docking", "cartpole"):
            config, report = validate_environment_file(CONFIG_DIR / task / "environment.yml")
            assert report.ok, str(report)
