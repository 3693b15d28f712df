"""Quantum-inspired reinforcement learning for UAV trajectory planning."""

from ._core import (
    Action,
    AgentKind,
    AmplitudeRegister,
    CarrierConfig,
    Cell,
    EnvConfig,
    GridWorld,
    GroundUser,
    QiRLConfig,
    Rng,
    RunConfig,
    RunResult,
    amplitude_ratio,
    collapse,
    convergence_metrics,
    dp_optimal,
    enumerate_paths,
    grover_analytic,
    grover_matrix,
    load_env_file,
    load_run_config,
    path_loss_db,
    qirl_update,
    run,
    snr,
    sum_rate,
    synthetic_config,
    write_outputs,
)

__all__ = [name for name in dir() if not name.startswith("_")]
