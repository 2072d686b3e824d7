"""benchlens: benchmark suite characterization from hardware counters."""

from .cluster import ClusterCut, Dendrogram, build_dendrogram, cut, cut_to_groups, medoid
from .compare import SuiteComparison, compare_suites, instruction_volume_ratio
from .dataset import (
    CounterMap,
    CounterSample,
    ParseResult,
    RunRecord,
    load_canonical,
    load_counter_maps,
    parse_counter_file,
    save_canonical,
    validate_store,
)
from .features import FeatureMatrix, build_matrix, denormalize, normalize
from .metrics import MetricVector, derive_metrics, suite_summary
from .pca import LoadingReport, PcaModel, fit_pca, loading_table, project
from .proxy import (
    BlendProfile,
    RrrSchedule,
    WorkloadProfile,
    blend_distance,
    search_mix,
    simulate_rrr,
)
from .subset import SubsetReport, evaluate_subset, oracle_best_subset, select_representatives

__version__ = "0.1.0"

__all__ = [
    "BlendProfile",
    "ClusterCut",
    "CounterMap",
    "CounterSample",
    "Dendrogram",
    "FeatureMatrix",
    "LoadingReport",
    "MetricVector",
    "ParseResult",
    "PcaModel",
    "RrrSchedule",
    "RunRecord",
    "SubsetReport",
    "SuiteComparison",
    "WorkloadProfile",
    "blend_distance",
    "build_dendrogram",
    "build_matrix",
    "compare_suites",
    "cut",
    "cut_to_groups",
    "denormalize",
    "derive_metrics",
    "evaluate_subset",
    "fit_pca",
    "instruction_volume_ratio",
    "load_canonical",
    "load_counter_maps",
    "loading_table",
    "medoid",
    "normalize",
    "oracle_best_subset",
    "parse_counter_file",
    "project",
    "save_canonical",
    "search_mix",
    "select_representatives",
    "simulate_rrr",
    "suite_summary",
    "validate_store",
]
