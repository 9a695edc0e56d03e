"""Sparse gradual argumentation classifiers: structure search + gradient training."""

from .baselines import DecisionTree, Metrics, evaluate_metrics, train_logistic, train_tree
from .data import (
    BinarizedDataset,
    DatasetSchema,
    Indicator,
    RawDataset,
    SplitIndices,
    binarize,
    load_csv,
    load_schema,
    raw_feature_matrix,
    schema_from_dict,
    split_stratified,
)
from .errors import (
    CodecError,
    ConfigError,
    GafError,
    InputShapeError,
    InvalidGraphError,
    ModelFormatError,
    ParseError,
    SchemaError,
    StratificationError,
)
from .experiment import (
    ExperimentConfig,
    RunRecord,
    load_experiment_config,
    run_baseline_experiment,
    run_training_experiment,
)
from .ga import (
    Chromosome,
    EvaluatedIndividual,
    GaConfig,
    GenerationStats,
    decode,
    evolve,
    fitness,
)
from .graph import (
    Argument,
    GafStructure,
    Interpretation,
    LayeredGaf,
    Polarity,
    WeightedEdge,
    build_gaf,
    connection_count,
    edge_polarity,
    evaluate,
    output_distributions,
    prune_inert_edges,
    strength_trajectory,
)
from .model_io import FORMAT_VERSION, from_json, to_dot, to_json
from .train import MaskedNet, TrainConfig, TrainedClassifier, TrainResult, to_classifier, train
from .util import derive_seed

__all__ = [
    "Argument",
    "BinarizedDataset",
    "Chromosome",
    "CodecError",
    "ConfigError",
    "DatasetSchema",
    "DecisionTree",
    "EvaluatedIndividual",
    "ExperimentConfig",
    "FORMAT_VERSION",
    "GaConfig",
    "GafError",
    "GafStructure",
    "GenerationStats",
    "Indicator",
    "InputShapeError",
    "Interpretation",
    "InvalidGraphError",
    "LayeredGaf",
    "MaskedNet",
    "Metrics",
    "ModelFormatError",
    "ParseError",
    "Polarity",
    "RawDataset",
    "RunRecord",
    "SchemaError",
    "SplitIndices",
    "StratificationError",
    "TrainConfig",
    "TrainResult",
    "TrainedClassifier",
    "WeightedEdge",
    "binarize",
    "build_gaf",
    "connection_count",
    "decode",
    "derive_seed",
    "edge_polarity",
    "evaluate",
    "evaluate_metrics",
    "evolve",
    "fitness",
    "from_json",
    "load_csv",
    "load_experiment_config",
    "load_schema",
    "output_distributions",
    "prune_inert_edges",
    "raw_feature_matrix",
    "run_baseline_experiment",
    "run_training_experiment",
    "schema_from_dict",
    "split_stratified",
    "strength_trajectory",
    "to_classifier",
    "to_dot",
    "to_json",
    "train",
    "train_logistic",
    "train_tree",
]
