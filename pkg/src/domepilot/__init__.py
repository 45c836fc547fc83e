"""domepilot: weather-driven dome control.

Labeling pipeline (condition table + temperature gate), from-scratch
decision tree and k-NN classifiers, evaluation reports, and a dome
controller with a hard rain override and AC interlock.
"""

from .controller import (
    CAUSE_MODEL,
    CAUSE_RAIN,
    CAUSE_TEMP,
    CAUSE_UNMAPPED,
    DecisionLog,
    DomeCommand,
    SensorFrame,
    SignalDeliveryError,
    decide,
    decide_inputs,
    emit_signal,
    parse_signal,
    replay,
)
from .knn import KnnModel, default_k, distance, predict_knn, train_knn
from .metrics import (
    ConfusionMatrix,
    EvalReport,
    accuracy,
    confusion,
    evaluate,
    f1,
    mse,
    weighted_f1,
)
from .tree import TreeConfig, TreeModel, best_split, impurity, predict_tree, train_tree
from .weather import (
    FEATURE_NAMES,
    TEMP_OPEN_HIGH,
    TEMP_OPEN_LOW,
    CleaningReport,
    ConditionTable,
    LabeledSample,
    SchemaError,
    SplitSpec,
    UnmappedConditionError,
    WeatherObservation,
    condition_flag,
    derive_state,
    filter_city,
    parse_dataset,
    split,
    to_samples,
)

__version__ = "0.1.0"
