from .config import ExperimentConfig
from .cv import RunResult, evaluate_split, monte_carlo_cv
from .datasets import export_iris, iris_pair, load_dataset, save_dataset, xor_benchmark
from .results import emit_results, read_results, summarize

__all__ = [
    "ExperimentConfig",
    "RunResult",
    "emit_results",
    "evaluate_split",
    "export_iris",
    "iris_pair",
    "load_dataset",
    "monte_carlo_cv",
    "read_results",
    "save_dataset",
    "summarize",
    "xor_benchmark",
]
