from .base import (
    Done,
    DoneResult,
    DoneStatusCode,
    EpisodeState,
    Extractor,
    ExtractorSpec,
    Functor,
    FunctorError,
    FunctorNode,
    FunctorSpec,
    Glue,
    ObservationBox,
    PartBindingError,
    Reward,
    SharedDone,
    UnknownExtractorTarget,
)
from .graph import (
    FUNCTOR_REGISTRY,
    CompiledGraph,
    CycleDetected,
    UnknownFunctor,
    build_graph,
    get_functor_class,
    register_functor,
)
from . import builtins as _builtins  # registers the built-in functor set

BUILTIN_FUNCTORS = _builtins.BUILTIN_FUNCTORS

__all__ = [
    "BUILTIN_FUNCTORS",
    "CompiledGraph",
    "CycleDetected",
    "Done",
    "DoneResult",
    "DoneStatusCode",
    "EpisodeState",
    "Extractor",
    "ExtractorSpec",
    "Functor",
    "FunctorError",
    "FunctorNode",
    "FunctorSpec",
    "FUNCTOR_REGISTRY",
    "Glue",
    "ObservationBox",
    "PartBindingError",
    "Reward",
    "SharedDone",
    "UnknownExtractorTarget",
    "UnknownFunctor",
    "build_graph",
    "get_functor_class",
    "register_functor",
]
