from .base import CountingProblem, Problem, has_capability
from .cartpole import CartPoleSpec, CartPoleSwingUp, cartpole_rollout
from .static import (
    Ackley,
    NarrowValley2D,
    Rastrigin,
    Rosenbrock,
    SinusoidConvex1D,
    StyblinskiTang,
    make_static,
)

__all__ = [
    "Problem",
    "CountingProblem",
    "has_capability",
    "Rosenbrock",
    "StyblinskiTang",
    "Rastrigin",
    "Ackley",
    "SinusoidConvex1D",
    "NarrowValley2D",
    "make_static",
    "CartPoleSpec",
    "CartPoleSwingUp",
    "cartpole_rollout",
]
