"""Config tree validation with path-addressed error reporting.

Validation is total: any loaded tree yields either a typed config or a
ValidationReport whose errors carry the slash-separated path of the offending
node, in document order.  Nothing here raises for bad user input.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .. import epp as epp_mod
from ..epp import DISTRIBUTION_KINDS, Increment, ParameterSpec
from ..functors.base import ExtractorSpec, FunctorSpec
from ..functors.graph import FUNCTOR_REGISTRY
from ..parts import GLOBAL_REGISTRY, PluginRegistry
from ..simulators import SIMULATORS
from ..units import UnknownUnit as UnknownUnitError
from ..units import get_unit
from . import loader
from .schema import (
    AgentConfig,
    EnvironmentConfig,
    EpisodeEndMode,
    PartConfig,
    PlatformConfig,
    PolicyConfig,
    SpaceCheckMode,
)


class ErrorCode(enum.Enum):
    UNKNOWN_FUNCTOR = "UnknownFunctor"
    MISSING_FIELD = "MissingField"
    TYPE_MISMATCH = "TypeMismatch"
    UNKNOWN_UNIT = "UnknownUnit"
    DIMENSION_MISMATCH = "DimensionMismatch"
    UNKNOWN_REFERENCE = "UnknownReference"
    UNKNOWN_PART_GROUP = "UnknownPartGroup"
    FILE_NOT_FOUND = "FileNotFound"
    PARSE_ERROR = "ParseError"
    INCLUDE_CYCLE = "IncludeCycle"


@dataclass(frozen=True)
class ValidationError:
    path: str
    code: ErrorCode
    message: str


@dataclass
class ValidationReport:
    errors: list[ValidationError] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def add(self, path: str, code: ErrorCode, message: str) -> None:
        self.errors.append(ValidationError(path, code, message))

    def __str__(self) -> str:
        if self.ok:
            return "0 errors"
        lines = [f"{len(self.errors)} error(s):"]
        lines += [f"  {e.path}: [{e.code.value}] {e.message}" for e in self.errors]
        return "\n".join(lines)


class UnknownReference(Exception):
    def __init__(self, key: str):
        self.key = key
        super().__init__(f"unknown reference key '{key}'")


def _join(*parts) -> str:
    return "/".join(str(p) for p in parts if p != "")


class _Validator:
    def __init__(self, report: ValidationReport):
        self.report = report

    def require(self, tree: dict, key: str, path: str, types=None):
        if key not in tree:
            self.report.add(_join(path, key), ErrorCode.MISSING_FIELD, f"missing required key '{key}'")
            return None
        value = tree[key]
        if types is not None and not isinstance(value, types):
            self.report.add(
                _join(path, key),
                ErrorCode.TYPE_MISMATCH,
                f"expected {_type_names(types)}, got {type(value).__name__}",
            )
            return None
        return value

    def optional(self, tree: dict, key: str, path: str, types=None, default=None):
        if key not in tree:
            return default
        value = tree[key]
        if types is not None and not isinstance(value, types):
            self.report.add(
                _join(path, key),
                ErrorCode.TYPE_MISMATCH,
                f"expected {_type_names(types)}, got {type(value).__name__}",
            )
            return default
        return value


def _type_names(types) -> str:
    if not isinstance(types, tuple):
        types = (types,)
    return " or ".join(t.__name__ for t in types)


def _check_unit(name, path: str, report: ValidationReport):
    if not isinstance(name, str):
        report.add(path, ErrorCode.TYPE_MISMATCH, f"unit name must be a string, got {type(name).__name__}")
        return None
    try:
        return get_unit(name)
    except UnknownUnitError:
        report.add(path, ErrorCode.UNKNOWN_UNIT, f"unknown unit '{name}'")
        return None


def parse_parameter_spec(name: str, tree, path: str, report: ValidationReport) -> ParameterSpec | None:
    """Parse one parameter entry; bare scalars are Constant with unit none."""
    if isinstance(tree, (int, float)) and not isinstance(tree, bool):
        return ParameterSpec(name, epp_mod.Constant(float(tree)))
    if not isinstance(tree, dict):
        report.add(path, ErrorCode.TYPE_MISMATCH, "parameter must be a number or a mapping")
        return None
    v = _Validator(report)
    dist_tree = v.require(tree, "distribution", path, dict)
    unit = _check_unit(tree.get("unit", "none"), _join(path, "unit"), report)
    if dist_tree is None or unit is None:
        return None

    kind = v.require(dist_tree, "kind", _join(path, "distribution"), str)
    if kind is None:
        return None
    cls = DISTRIBUTION_KINDS.get(kind)
    if cls is None:
        report.add(
            _join(path, "distribution", "kind"),
            ErrorCode.TYPE_MISMATCH,
            f"unknown distribution kind '{kind}' (expected one of {sorted(DISTRIBUTION_KINDS)})",
        )
        return None
    hyper = {k: v2 for k, v2 in dist_tree.items() if k != "kind"}
    try:
        dist = cls(**hyper)
        dist.validate()
    except (TypeError, ValueError) as exc:
        report.add(_join(path, "distribution"), ErrorCode.TYPE_MISMATCH, str(exc))
        return None

    updaters: list[Increment] = []
    updater_trees = v.optional(tree, "updaters", path, list, [])
    for i, ut in enumerate(updater_trees):
        upath = _join(path, "updaters", i)
        if not isinstance(ut, dict):
            report.add(upath, ErrorCode.TYPE_MISMATCH, "updater must be a mapping")
            continue
        uv = _Validator(report)
        target = uv.require(ut, "target", upath, str)
        step = uv.require(ut, "step", upath, (int, float))
        kind_name = uv.optional(ut, "kind", upath, str, "increment")
        if kind_name != "increment":
            report.add(_join(upath, "kind"), ErrorCode.TYPE_MISMATCH, f"unknown updater kind '{kind_name}'")
            continue
        if target is None or step is None:
            continue
        if target not in dist.mutable:
            report.add(
                _join(upath, "target"),
                ErrorCode.TYPE_MISMATCH,
                f"'{target}' is not a hyperparameter of {cls.__name__}",
            )
            continue
        limit = ut.get("limit")
        updaters.append(Increment(target, float(step), None if limit is None else float(limit)))
    return ParameterSpec(name, dist, unit, updaters)


def parse_parameter_store(tree, path: str, report: ValidationReport) -> dict[str, ParameterSpec]:
    store: dict[str, ParameterSpec] = {}
    if tree is None:
        return store
    if not isinstance(tree, dict):
        report.add(path, ErrorCode.TYPE_MISMATCH, "expected a mapping of parameter specs")
        return store
    for name, sub in tree.items():
        spec = parse_parameter_spec(str(name), sub, _join(path, name), report)
        if spec is not None:
            store[str(name)] = spec
    return store


def _parse_config_values(tree: dict, path: str, report: ValidationReport) -> dict:
    """Check unit fields inside a functor config block and keep values raw."""
    out = {}
    for key, value in tree.items():
        if isinstance(value, dict) and set(value) == {"value", "unit"}:
            _check_unit(value["unit"], _join(path, key, "unit"), report)
        elif key == "unit":
            _check_unit(value, _join(path, key), report)
        out[key] = value
    return out


def parse_functor_spec(
    tree,
    path: str,
    report: ValidationReport,
    known_references: dict[str, ParameterSpec],
) -> FunctorSpec | None:
    if not isinstance(tree, dict):
        report.add(path, ErrorCode.TYPE_MISMATCH, "functor spec must be a mapping")
        return None
    v = _Validator(report)
    functor = v.require(tree, "functor", path, str)
    if functor is None:
        return None
    cls = FUNCTOR_REGISTRY.get(functor)
    if cls is None:
        report.add(
            _join(path, "functor"),
            ErrorCode.UNKNOWN_FUNCTOR,
            f"no functor registered under '{functor}'",
        )
        return None

    name = v.optional(tree, "name", path, str)
    config_tree = v.optional(tree, "config", path, dict, {})
    config = _parse_config_values(config_tree, _join(path, "config"), report)

    for req in cls.required:
        if req not in config and req not in tree.get("references", {}):
            report.add(
                _join(path, "config", req),
                ErrorCode.MISSING_FIELD,
                f"functor '{functor}' requires config field '{req}'",
            )

    references = v.optional(tree, "references", path, dict, {})
    for param, key in references.items():
        rpath = _join(path, "references", param)
        if not isinstance(key, str):
            report.add(rpath, ErrorCode.TYPE_MISMATCH, "reference key must be a string")
            continue
        if key not in known_references:
            report.add(rpath, ErrorCode.UNKNOWN_REFERENCE, f"reference key '{key}' is not declared")
            continue
        required_dim = cls.reference_dimensions.get(param)
        if required_dim is not None:
            actual = known_references[key].unit.dimension.value
            if actual != required_dim:
                report.add(
                    rpath,
                    ErrorCode.DIMENSION_MISMATCH,
                    f"'{param}' expects dimension '{required_dim}' but reference "
                    f"'{key}' has dimension '{actual}'",
                )

    wrapped_tree = tree.get("wrapped")
    wrapped = _parse_wrapped(wrapped_tree, _join(path, "wrapped"), report, known_references)

    extractor = None
    ex_tree = v.optional(tree, "extractor", path, dict)
    if ex_tree is not None:
        ev = _Validator(report)
        glue = ev.require(ex_tree, "glue", _join(path, "extractor"), str)
        if glue is not None:
            extractor = ExtractorSpec(glue, ex_tree.get("key"))

    return FunctorSpec(
        functor=functor,
        name=name,
        config=config,
        references={str(k): str(val) for k, val in references.items() if isinstance(val, str)},
        wrapped=wrapped,
        extractor=extractor,
    )


def _parse_wrapped(tree, path: str, report: ValidationReport, known_references):
    if tree is None:
        return None
    if isinstance(tree, str):
        return tree
    if isinstance(tree, list):
        return [
            _parse_wrapped(item, _join(path, i), report, known_references)
            for i, item in enumerate(tree)
        ]
    if isinstance(tree, dict) and "functor" not in tree:
        return {
            str(k): _parse_wrapped(v, _join(path, k), report, known_references)
            for k, v in tree.items()
        }
    return parse_functor_spec(tree, path, report, known_references)


def _parse_functor_list(
    tree, path: str, report: ValidationReport, known_references
) -> list[FunctorSpec]:
    specs: list[FunctorSpec] = []
    if tree is None:
        return specs
    if not isinstance(tree, list):
        report.add(path, ErrorCode.TYPE_MISMATCH, "expected a list of functor specs")
        return specs
    for i, sub in enumerate(tree):
        spec = parse_functor_spec(sub, _join(path, i), report, known_references)
        if spec is not None:
            specs.append(spec)
    return specs


def validate_agent(
    tree,
    registry: PluginRegistry = GLOBAL_REGISTRY,
    extra_references: dict[str, ParameterSpec] | None = None,
    path_prefix: str = "",
) -> tuple[AgentConfig | None, ValidationReport]:
    """Validate an agent config tree into an AgentConfig, or report errors."""
    report = ValidationReport()
    if not isinstance(tree, dict):
        report.add(path_prefix, ErrorCode.TYPE_MISMATCH, "agent config must be a mapping")
        return None, report
    v = _Validator(report)
    p = path_prefix

    name = v.require(tree, "agent", p, str)
    platform_names = v.require(tree, "platforms", p, list)
    if platform_names is not None:
        if not platform_names:
            report.add(_join(p, "platforms"), ErrorCode.TYPE_MISMATCH, "at least one platform required")
        for i, pn in enumerate(platform_names):
            if not isinstance(pn, str):
                report.add(_join(p, "platforms", i), ErrorCode.TYPE_MISMATCH, "platform name must be a string")

    parts: list[PartConfig] = []
    for i, part_tree in enumerate(v.optional(tree, "parts", p, list, [])):
        ppath = _join(p, "parts", i)
        if isinstance(part_tree, str):
            part_tree = {"part": part_tree}
        if not isinstance(part_tree, dict):
            report.add(ppath, ErrorCode.TYPE_MISMATCH, "part entry must be a mapping or string")
            continue
        pv = _Validator(report)
        group = pv.require(part_tree, "part", ppath, str)
        if group is None:
            continue
        if not registry.has_group(group):
            report.add(
                _join(ppath, "part"),
                ErrorCode.UNKNOWN_PART_GROUP,
                f"no part group named '{group}' in the plugin registry",
            )
            continue
        parts.append(PartConfig(group, pv.optional(part_tree, "config", ppath, dict, {})))

    reference_store = parse_parameter_store(
        tree.get("reference_store"), _join(p, "reference_store"), report
    )
    known_references = {**(extra_references or {}), **reference_store}

    epp_tree = v.optional(tree, "episode_parameter_provider", p, dict, {})
    parameters = parse_parameter_store(
        epp_tree.get("parameters"), _join(p, "episode_parameter_provider", "parameters"), report
    )

    glues = _parse_functor_list(tree.get("glues"), _join(p, "glues"), report, known_references)
    if "glues" not in tree:
        report.add(_join(p, "glues"), ErrorCode.MISSING_FIELD, "missing required key 'glues'")
    elif not glues and not report.errors:
        report.add(_join(p, "glues"), ErrorCode.TYPE_MISMATCH, "at least one glue required")
    dones = _parse_functor_list(tree.get("dones"), _join(p, "dones"), report, known_references)
    rewards = _parse_functor_list(tree.get("rewards"), _join(p, "rewards"), report, known_references)

    policy = PolicyConfig("random")
    policy_tree = v.optional(tree, "policy", p, dict)
    if policy_tree is not None:
        pv = _Validator(report)
        pname = pv.require(policy_tree, "name", _join(p, "policy"), str)
        if pname is not None:
            policy = PolicyConfig(pname, pv.optional(policy_tree, "config", _join(p, "policy"), dict, {}))

    if not report.ok:
        return None, report
    return (
        AgentConfig(
            name=name,
            platform_names=list(platform_names),
            parts=parts,
            glues=glues,
            dones=dones,
            rewards=rewards,
            parameters=parameters,
            reference_store=reference_store,
            policy=policy,
        ),
        report,
    )


_END_MODES = {m.value: m for m in EpisodeEndMode}


def _parse_space_check(tree, path: str, report: ValidationReport) -> SpaceCheckMode:
    if tree is None:
        return SpaceCheckMode.every_step()
    if isinstance(tree, str):
        if tree == "every_step":
            return SpaceCheckMode.every_step()
        if tree == "off":
            return SpaceCheckMode.off()
        if tree == "spot_check":
            return SpaceCheckMode.spot_check()
        report.add(path, ErrorCode.TYPE_MISMATCH, f"unknown space_check_mode '{tree}'")
    elif isinstance(tree, dict) and "spot_check" in tree:
        prob = tree["spot_check"]
        if not isinstance(prob, (int, float)) or not 0 <= prob <= 1:
            report.add(_join(path, "spot_check"), ErrorCode.TYPE_MISMATCH, "probability must be in [0, 1]")
        else:
            return SpaceCheckMode.spot_check(float(prob))
    else:
        report.add(path, ErrorCode.TYPE_MISMATCH, "expected 'every_step', 'off', or {spot_check: p}")
    return SpaceCheckMode.every_step()


def validate_environment(
    tree,
    base_dir: str | Path = ".",
    registry: PluginRegistry = GLOBAL_REGISTRY,
) -> tuple[EnvironmentConfig | None, ValidationReport]:
    """Validate an environment config tree, loading agent files it references."""
    report = ValidationReport()
    if not isinstance(tree, dict):
        report.add("", ErrorCode.TYPE_MISMATCH, "environment config must be a mapping")
        return None, report
    base_dir = Path(base_dir)
    v = _Validator(report)

    sim_tree = v.require(tree, "simulator", "", dict)
    sim_name, sim_config = None, {}
    if sim_tree is not None:
        sv = _Validator(report)
        sim_name = sv.require(sim_tree, "name", "simulator", str)
        sim_config = sv.optional(sim_tree, "config", "simulator", dict, {})
        if sim_name is not None and sim_name not in SIMULATORS:
            report.add(
                "simulator/name",
                ErrorCode.UNKNOWN_FUNCTOR,
                f"unknown simulator '{sim_name}' (expected one of {sorted(SIMULATORS)})",
            )

    platforms: list[PlatformConfig] = []
    platform_trees = v.require(tree, "platforms", "", list) or []
    for i, pt in enumerate(platform_trees):
        ppath = _join("platforms", i)
        if not isinstance(pt, dict):
            report.add(ppath, ErrorCode.TYPE_MISMATCH, "platform entry must be a mapping")
            continue
        pv = _Validator(report)
        pname = pv.require(pt, "name", ppath, str)
        ptype = pv.require(pt, "platform_type", ppath, str)
        init = parse_parameter_store(pt.get("initialization"), _join(ppath, "initialization"), report)
        if pname is not None and ptype is not None:
            platforms.append(PlatformConfig(pname, ptype, init))

    reference_store = parse_parameter_store(tree.get("reference_store"), "reference_store", report)

    horizon = v.optional(tree, "horizon", "", int, 1000)
    if isinstance(horizon, bool) or (horizon is not None and horizon < 1):
        report.add("horizon", ErrorCode.TYPE_MISMATCH, "horizon must be an integer >= 1")
        horizon = 1000

    end_mode_name = v.optional(tree, "episode_end_mode", "", str, EpisodeEndMode.ALL_AGENTS_DONE.value)
    end_mode = _END_MODES.get(end_mode_name)
    if end_mode is None:
        report.add(
            "episode_end_mode",
            ErrorCode.TYPE_MISMATCH,
            f"expected one of {sorted(_END_MODES)}, got '{end_mode_name}'",
        )
        end_mode = EpisodeEndMode.ALL_AGENTS_DONE

    space_check = _parse_space_check(tree.get("space_check_mode"), "space_check_mode", report)

    shared_dones = _parse_functor_list(tree.get("shared_dones"), "shared_dones", report, reference_store)

    agents: list[AgentConfig] = []
    agent_trees = v.require(tree, "agents", "", list) or []
    declared_platforms = {p.name for p in platforms}
    for i, at in enumerate(agent_trees):
        apath = _join("agents", i)
        if isinstance(at, str):
            try:
                at = loader.load_config(base_dir / at)
            except loader.FileNotFound as exc:
                report.add(apath, ErrorCode.FILE_NOT_FOUND, str(exc))
                continue
            except loader.IncludeCycle as exc:
                report.add(apath, ErrorCode.INCLUDE_CYCLE, str(exc))
                continue
            except loader.ParseError as exc:
                report.add(apath, ErrorCode.PARSE_ERROR, str(exc))
                continue
        agent, agent_report = validate_agent(
            at, registry, extra_references=reference_store, path_prefix=apath
        )
        report.errors.extend(agent_report.errors)
        if agent is None:
            continue
        for j, pn in enumerate(agent.platform_names):
            if pn not in declared_platforms:
                report.add(
                    _join(apath, "platforms", j),
                    ErrorCode.UNKNOWN_REFERENCE,
                    f"agent platform '{pn}' is not declared in the environment",
                )
        agents.append(agent)

    if not report.ok:
        return None, report
    return (
        EnvironmentConfig(
            simulator_name=sim_name,
            simulator_config=sim_config,
            platforms=platforms,
            agents=agents,
            shared_dones=shared_dones,
            episode_end_mode=end_mode,
            horizon=int(horizon),
            reference_store=reference_store,
            space_check_mode=space_check,
        ),
        report,
    )


def validate_environment_file(path: str | Path) -> tuple[EnvironmentConfig | None, ValidationReport]:
    """Load and validate an environment file; load errors land in the report."""
    report = ValidationReport()
    try:
        tree = loader.load_config(path)
    except loader.FileNotFound as exc:
        report.add("", ErrorCode.FILE_NOT_FOUND, str(exc))
        return None, report
    except loader.IncludeCycle as exc:
        report.add("", ErrorCode.INCLUDE_CYCLE, str(exc))
        return None, report
    except loader.ParseError as exc:
        report.add("", ErrorCode.PARSE_ERROR, str(exc))
        return None, report
    return validate_environment(tree, base_dir=Path(path).parent)


def resolve_references(config: AgentConfig, known_keys: set[str]) -> AgentConfig:
    """Check every functor reference against the declared store keys.

    References stay as deferred store keys; a single per-episode sample feeds
    all referents through the Reference Store at runtime.
    """

    def walk(spec):
        if isinstance(spec, FunctorSpec):
            for key in spec.references.values():
                if key not in known_keys:
                    raise UnknownReference(key)
            walk(spec.wrapped)
        elif isinstance(spec, list):
            for item in spec:
                walk(item)
        elif isinstance(spec, dict):
            for item in spec.values():
                walk(item)

    for group in (config.glues, config.dones, config.rewards):
        walk(group)
    return config
