"""tsforge: composable fit/transform filters for two-column sensor
series, native tree ensembles, a directory-driven sensor-type
classifier, and a seeded parallel benchmark harness."""

from .core import (
    DateInterval,
    FeatureTable,
    Identity,
    Pipeline,
    Transformer,
    TSError,
    TSFrame,
    mix_seed,
)
from .ingest import CsvDateValReader, DateFormat, read_csv_datetime, write_csv_datetime
from .preprocess import (
    Aggregator,
    AggregatorConfig,
    ImputerConfig,
    KnnImputer,
    MonotonicNormalizer,
    OutlierCleaner,
    OutlierConfig,
    SeriesKind,
    aggregate,
    detect_series_kind,
    impute_knn,
    normalize_monotonic,
    remove_outliers,
)
from .features import (
    ColumnImputer,
    DateFeatures,
    OneHotEncoder,
    SlidingWindow,
    StandardScaler,
    StatFeatures,
    StatVector,
    WindowConfig,
    dateify,
    matrify,
    missing_blocks,
    statify,
)
from .learners import (
    AdaBoost,
    BestOfEnsemble,
    BoostConfig,
    DecisionTree,
    EnsembleConfig,
    ForestConfig,
    RandomForest,
    StackingEnsemble,
    TreeConfig,
    VotingEnsemble,
    ensemble_train,
    predict,
    train_adaboost,
    train_forest,
    train_tree,
)
from .tsclassifier import (
    ClassifierConfig,
    ModelArtifact,
    PredictionTable,
    classify,
    extract_features_from_directory,
    label_from_filename,
    load_model,
    save_model,
    testing_accuracy,
)
from .bench import (
    BenchmarkReport,
    TrialPlan,
    build_learner,
    holdout,
    run_benchmark,
    score,
)

__version__ = "0.1.0"
