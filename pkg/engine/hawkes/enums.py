from enum import Enum


class KernelType(str, Enum):
    EXPONENTIAL = "exponential"
    POWER_LAW = "power_law"
    ZERO = "zero"


class JumpType(str, Enum):
    ZERO = "zero"
    CONSTANT = "constant"
    EXPONENTIAL = "exponential"
    PARETO = "pareto"


class SojournType(str, Enum):
    INFINITE = "infinite"
    EXPONENTIAL = "exponential"
    DETERMINISTIC = "deterministic"


class Process(str, Enum):
    N = "N"
    Q = "Q"
    LAMBDA = "lambda"


class Sampler(str, Enum):
    THINNING = "thinning"
    CLUSTER = "cluster"


class MarkCoupling(str, Enum):
    SHARED = "shared"
    INDEPENDENT = "independent"


class MomentKind(str, Enum):
    MEAN_Q = "mean_Q"
    MEAN_LAMBDA = "mean_lambda"
    VAR_Q = "var_Q"
    VAR_LAMBDA = "var_lambda"
    CROSS_QQ = "cross_QQ"
    CROSS_QL = "cross_QL"
    TWO_TIME_QQ = "twotime_QQ"


class MomentSource(str, Enum):
    TRANSFORM = "transform"
    MC = "mc"
    BOTH = "both"


class InversionMethod(str, Enum):
    TALBOT = "talbot"
    DEHOOG = "dehoog"
