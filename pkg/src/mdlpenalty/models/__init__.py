from .ggm import GgmProblem, PrecisionEstimate, double_ring_precision, double_ring_sample, kl_gaussian
from .ridge import RidgeProblem, RidgeSolution, predict, rmse

__all__ = [
    "GgmProblem",
    "PrecisionEstimate",
    "RidgeProblem",
    "RidgeSolution",
    "double_ring_precision",
    "double_ring_sample",
    "kl_gaussian",
    "predict",
    "rmse",
]
