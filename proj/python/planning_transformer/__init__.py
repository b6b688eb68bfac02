"""Python bindings for the planning transformer library."""

from ._core import (
    ConfigError,
    ContractViolation,
    Dataset,
    DimensionError,
    Env,
    MazeLayout,
    Model,
    NumericalError,
    RolloutRecord,
    SchemaError,
    builtin_maze_layout,
    default_run_config,
    env_names,
    evaluate,
    generate_dataset,
    load_dataset,
    load_model,
    make_env,
    mean_std,
    parse_maze_layout,
    rollout,
    sample_plan_indices,
    train,
    validate_run_config,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
