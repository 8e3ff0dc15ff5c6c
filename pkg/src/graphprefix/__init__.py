"""Graph-conditioned prefix tuning of a small frozen language model."""

__version__ = "0.1.0"

from .graphs import Graph, permute, random_walk_matrix, rrwp_raw
from .tensor import Parameter, Tensor, backward, grad_check, no_grad

__all__ = [
    "Graph", "Parameter", "Tensor", "backward", "grad_check", "no_grad",
    "permute", "random_walk_matrix", "rrwp_raw", "__version__",
]
