from . import tape
from .tape import NonFiniteError, ShapeError, Tensor
from .params import BoundParams, ParamVector, join, split
from .layers import LOG_STD_RANGE, MLPArch, gaussian_loglik, glorot, init_mlp, mlp_forward
from .optim import AdamState, adam_step, grad, train_step
from .gradcheck import GradCheckReport, finite_diff_check
from .checkpoint import ArchMismatchError, CheckpointFormatError, read_checkpoint, write_checkpoint

__all__ = [
    "LOG_STD_RANGE",
    "AdamState",
    "ArchMismatchError",
    "BoundParams",
    "CheckpointFormatError",
    "GradCheckReport",
    "MLPArch",
    "NonFiniteError",
    "ParamVector",
    "ShapeError",
    "Tensor",
    "adam_step",
    "finite_diff_check",
    "gaussian_loglik",
    "glorot",
    "grad",
    "init_mlp",
    "join",
    "mlp_forward",
    "read_checkpoint",
    "split",
    "tape",
    "train_step",
    "write_checkpoint",
]
