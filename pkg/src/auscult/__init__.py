"""Interactive lung auscultation agent: synthetic cohorts, a Q-learning
examiner that picks auscultation points and declares an alarm status, and
the evaluation and serving layers around it."""

from .cohort import (
    CohortConfig,
    Examination,
    generate_cohort,
    load_cohort,
    observe_point,
    render_raster,
    sample_examination,
    save_cohort,
)
from .env import (
    AUSCULTATION_LIMIT,
    Action,
    AuscultationEnv,
    EnvConfig,
    LIMIT_PENALTY,
    N_ACTIONS,
    REWARD_MATRIX,
    STEP_PENALTY,
    StaticSweepEnv,
    StepOutcome,
    apply_observation,
    decision_reward,
    flatten_state,
    new_state,
    unflatten_state,
)
from .errors import (
    AuscultError,
    CheckpointError,
    CohortFormatError,
    EpisodeFinishedError,
    IllegalActionError,
    NonFiniteError,
    RasterFormatError,
    RasterRangeError,
)
from .evaluate import (
    CrossValReport,
    EvalReport,
    Split,
    cross_validate,
    cross_validate_fixed,
    evaluate_interactive,
    evaluate_static,
    split_cohort,
    train_and_evaluate,
)
from .metrics import (
    ALARM,
    ConfusionCounts,
    NOT_ALARM,
    balanced_accuracy,
    counts_from_flags,
    counts_from_labels,
    f1,
    merge_to_alarm,
)
from .minienv import (
    MiniEnv,
    MiniEnvConfig,
    MiniExam,
    belief_transitions,
    enumerate_beliefs,
    reachable_beliefs,
    sample_mini_exam,
    solve_mini,
    value_iteration,
)
from .qnet import (
    AdamState,
    Batch,
    DEFAULT_LAYER_SIZES,
    QNetworkParams,
    adam_step,
    clone_params,
    forward,
    forward_batch,
    gradients,
    init_params,
    load_checkpoint,
    q_loss,
    save_checkpoint,
)
from .raster import (
    FeatureConfig,
    PhenomenaFeatures,
    ProbabilityRaster,
    extract_features,
    load_raster,
    raster_from_document,
    save_raster,
)
from .trainer import (
    EpisodeResult,
    ReplayBuffer,
    TrainConfig,
    TrainResult,
    Transition,
    bellman_target,
    epsilon_for_episode,
    run_episode,
    select_action,
    train,
    train_env,
    train_step,
    write_curves,
)

__version__ = "0.1.0"
