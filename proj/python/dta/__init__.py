"""Adaptive black-box performance profiling with oblique regression trees."""

from ._dta import (
    DeploymentSpace,
    Deployer,
    FinalModel,
    RunResult,
    complexity_r2,
    dump_grid_csv,
    evaluate_full_grid,
    make_deployer,
    run_profile,
    run_uni_baseline,
)

__all__ = [
    "DeploymentSpace",
    "Deployer",
    "FinalModel",
    "RunResult",
    "complexity_r2",
    "dump_grid_csv",
    "evaluate_full_grid",
    "make_deployer",
    "run_profile",
    "run_uni_baseline",
]
