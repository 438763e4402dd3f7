from .loader import ConfigLoadError, FileNotFound, IncludeCycle, ParseError, load_config
from .schema import (
    AgentConfig,
    EnvironmentConfig,
    EpisodeEndMode,
    PartConfig,
    PlatformConfig,
    PolicyConfig,
    SpaceCheckMode,
)
from .validate import (
    ErrorCode,
    UnknownReference,
    ValidationError,
    ValidationReport,
    resolve_references,
    validate_agent,
    validate_environment,
    validate_environment_file,
)

__all__ = [
    "AgentConfig",
    "ConfigLoadError",
    "EnvironmentConfig",
    "EpisodeEndMode",
    "ErrorCode",
    "FileNotFound",
    "IncludeCycle",
    "ParseError",
    "PartConfig",
    "PlatformConfig",
    "PolicyConfig",
    "SpaceCheckMode",
    "UnknownReference",
    "ValidationError",
    "ValidationReport",
    "load_config",
    "resolve_references",
    "validate_agent",
    "validate_environment",
    "validate_environment_file",
]
