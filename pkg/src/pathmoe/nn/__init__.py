from .functional import (
    assert_finite,
    l2_normalize_rows,
    masked_softmax_lastaxis,
    matmul,
    relu,
    softmax_lastaxis,
    softmax_row,
)
from .gradcheck import GradCheckReport, finite_difference_check
from .ops import (
    L2Normalize,
    Linear,
    LoraLinear,
    MaskedPool,
    Mlp,
    Relu,
    SelfAttention,
    Sigmoid,
    SoftmaxPool,
    run_backward,
)
from .optim import AdamWConfig, adamw_step
from .params import Parameter, gaussian_param, make_rng, spawn_rng, zero_grads, zeros_param
