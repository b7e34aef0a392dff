from .auc import censoring_survival, concordance_index, roc_auc, time_dependent_auc
from .km import KMCurve, LogRankResult, kaplan_meier, log_rank_test
from .probes import (
    EvalConfig,
    ProbeResult,
    SpecializationResult,
    linear_probe,
    probe_specialization_test,
    stratified_folds,
)
from .subgroups import (
    LOW_POWER_ARM_SIZE,
    SubgroupCell,
    risk_threshold_stratify,
    treatment_subgroup_analysis,
)
