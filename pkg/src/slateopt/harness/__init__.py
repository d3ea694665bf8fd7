from .config import RunConfig, load_config
from .dataset import Dataset, load_dataset, save_dataset
from .examples import ExampleBuilder, dataset_vocabulary
from .experiment import (
    CVResult,
    FoldReport,
    SweepPoint,
    cross_validate,
    run_fold,
    sweep_theta1,
)
from .stats import ScenarioCounts, metric_histograms, scenario_stats
from .synth import SynthSpec, generate_synthetic

__all__ = [
    "CVResult",
    "Dataset",
    "ExampleBuilder",
    "FoldReport",
    "RunConfig",
    "ScenarioCounts",
    "SweepPoint",
    "SynthSpec",
    "cross_validate",
    "dataset_vocabulary",
    "generate_synthetic",
    "load_config",
    "load_dataset",
    "metric_histograms",
    "run_fold",
    "save_dataset",
    "scenario_stats",
    "sweep_theta1",
]
