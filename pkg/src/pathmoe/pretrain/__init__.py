from .encoders import (
    EncoderDims,
    EncoderStack,
    FrozenBackbone,
    PathwayAdapters,
    build_encoder_stack,
    pathway_text,
)
from .infonce import info_nce_symmetric
from .pathways import ORGAN_SETS, PathwayId, anatomical_patch_weights, organ_columns
from .segmenter import CORRUPTION_MODES, segment_report
from .train import (
    PretrainConfig,
    PretrainResult,
    contrastive_eval_loss,
    pretrain_pathway,
    retrieval_top1,
)
