"""Decision-level fruit reachability with label-efficient active learning.

The package couples a closed-form kinematic feasibility oracle for a 5-DOF
harvesting arm with an RGB-D perception pipeline, a from-scratch random
forest, and a pool-based active-learning loop, plus an experiment harness
that sweeps query strategies across seeds.
"""

from .active import (
    ALConfig,
    RoundLog,
    run_loop,
    score_entropy,
    score_least_confidence,
    score_margin,
    score_qbc,
    select_batch,
)
from .config import AppConfig, default_config, load_config
from .dataset import (
    DetectionRecord,
    LabeledSample,
    PoolSplit,
    SceneConfig,
    generate_scene,
    ingest_detections,
    label_with_oracle,
    make_splits,
)
from .errors import (
    BoundaryError,
    ConfigError,
    IngestionError,
    NoDepthError,
    ReachALError,
)
from .features import FeatureVector, extract_features
from .forest import (
    ForestModel,
    TrainConfig,
    fit,
    fit_arrays,
    load_model,
    predict,
    predict_proba,
    predict_proba_matrix,
    save_model,
)
from .kinematics import (
    ArmPoint,
    BruteForceOracle,
    JointConfig,
    ManipulatorParams,
    forward_kinematics,
    is_reachable,
    is_reachable_bruteforce,
    sample_envelope,
)
from .metrics import (
    MetricSet,
    confusion_and_rates,
    efficiency_curve,
    evaluate,
    ik_call_reduction,
    roc_auc,
    roc_auc_pairwise,
)
from .perception import (
    CameraIntrinsics,
    CameraPoint,
    DepthPatch,
    Extrinsics,
    back_project,
    camera_to_arm,
    default_extrinsics,
    map_rgb_to_depth_pixel,
    robust_depth,
)
from .report import ExperimentGrid, run_grid

__version__ = "0.1.0"
