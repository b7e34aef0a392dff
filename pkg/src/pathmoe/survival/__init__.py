from .cox import cox_nll
from .head import (
    VARIANT_STRUCTURES,
    GateOutput,
    PathwayEmbeddings,
    Phenotype,
    RiskDecomposition,
    SurvivalHead,
    gate_forward,
    stratify_phenotype,
)
from .train import SurvivalTrainConfig, SurvivalTrainResult, train_survival
