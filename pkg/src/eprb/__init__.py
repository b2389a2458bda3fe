"""Event-by-event simulator of EPRB-type optical correlation experiments."""

__version__ = "0.1.0"

from .core import (
    ConfigError,
    FixedPolarization,
    IdentKind,
    Learning,
    Memoryless,
    NoRetardation,
    OrthogonalRandom,
    ParallelRandom,
    RandomStream,
    RunConfig,
    Settings,
    Topology,
)
from .experiment import (
    Dataset,
    MomentEstimates,
    SweepGeometry,
    chsh_multi_run,
    chsh_single_run,
    estimate_moments,
    run,
    run_sweep,
)

__all__ = [
    "__version__",
    "ConfigError",
    "Dataset",
    "FixedPolarization",
    "IdentKind",
    "Learning",
    "Memoryless",
    "MomentEstimates",
    "NoRetardation",
    "OrthogonalRandom",
    "ParallelRandom",
    "RandomStream",
    "RunConfig",
    "Settings",
    "SweepGeometry",
    "Topology",
    "chsh_multi_run",
    "chsh_single_run",
    "estimate_moments",
    "run",
    "run_sweep",
]
