"""Serialize typed configs back to plain trees (for run_config.json snapshots).

The emitted tree re-validates against the same schema, so a logged run
configuration can be reloaded verbatim.
"""

from __future__ import annotations

from ..epp import DISTRIBUTION_KINDS, ParameterSpec
from ..functors.base import FunctorSpec
from .schema import AgentConfig, EnvironmentConfig

_KIND_NAMES = {cls: name for name, cls in DISTRIBUTION_KINDS.items()}


def parameter_spec_to_tree(spec: ParameterSpec) -> dict:
    dist = spec.distribution
    tree: dict = {
        "distribution": {"kind": _KIND_NAMES[type(dist)], **vars(dist)},
        "unit": spec.unit.name,
    }
    if spec.updaters:
        tree["updaters"] = [
            {
                "kind": "increment",
                "target": u.target,
                "step": u.step,
                **({"limit": u.limit} if u.limit is not None else {}),
            }
            for u in spec.updaters
        ]
    return tree


def _store_to_tree(store: dict[str, ParameterSpec]) -> dict:
    return {name: parameter_spec_to_tree(spec) for name, spec in store.items()}


def functor_spec_to_tree(spec: FunctorSpec) -> dict:
    tree: dict = {"functor": spec.functor}
    if spec.name:
        tree["name"] = spec.name
    if spec.config:
        tree["config"] = spec.config
    if spec.references:
        tree["references"] = spec.references
    if spec.wrapped is not None:
        tree["wrapped"] = _wrapped_to_tree(spec.wrapped)
    if spec.extractor is not None:
        extractor: dict = {"glue": spec.extractor.glue}
        if spec.extractor.key is not None:
            extractor["key"] = spec.extractor.key
        tree["extractor"] = extractor
    return tree


def _wrapped_to_tree(wrapped):
    if isinstance(wrapped, FunctorSpec):
        return functor_spec_to_tree(wrapped)
    if isinstance(wrapped, list):
        return [_wrapped_to_tree(w) for w in wrapped]
    if isinstance(wrapped, dict):
        return {k: _wrapped_to_tree(w) for k, w in wrapped.items()}
    return wrapped  # name reference


def agent_config_to_tree(config: AgentConfig) -> dict:
    tree: dict = {
        "agent": config.name,
        "platforms": list(config.platform_names),
        "parts": [
            {"part": p.group, **({"config": p.config} if p.config else {})}
            for p in config.parts
        ],
        "glues": [functor_spec_to_tree(s) for s in config.glues],
        "policy": {"name": config.policy.name, "config": config.policy.config},
    }
    if config.dones:
        tree["dones"] = [functor_spec_to_tree(s) for s in config.dones]
    if config.rewards:
        tree["rewards"] = [functor_spec_to_tree(s) for s in config.rewards]
    if config.parameters:
        tree["episode_parameter_provider"] = {"parameters": _store_to_tree(config.parameters)}
    if config.reference_store:
        tree["reference_store"] = _store_to_tree(config.reference_store)
    return tree


def environment_config_to_tree(config: EnvironmentConfig) -> dict:
    space_check = config.space_check_mode
    tree: dict = {
        "simulator": {"name": config.simulator_name, "config": config.simulator_config},
        "platforms": [
            {
                "name": p.name,
                "platform_type": p.platform_type,
                **(
                    {"initialization": _store_to_tree(p.initialization)}
                    if p.initialization
                    else {}
                ),
            }
            for p in config.platforms
        ],
        "agents": [agent_config_to_tree(a) for a in config.agents],
        "horizon": config.horizon,
        "episode_end_mode": config.episode_end_mode.value,
        "space_check_mode": (
            {"spot_check": space_check.probability}
            if space_check.mode == "spot_check"
            else space_check.mode
        ),
    }
    if config.shared_dones:
        tree["shared_dones"] = [functor_spec_to_tree(s) for s in config.shared_dones]
    if config.reference_store:
        tree["reference_store"] = _store_to_tree(config.reference_store)
    return tree
