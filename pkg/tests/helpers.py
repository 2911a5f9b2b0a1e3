"""Shared test utilities."""

import numpy as np

from banditsurvey.core import ProblemInstance, ResponseDistribution


def random_instance(rng: np.random.Generator, k: int, n: int, x_star: int = 0) -> ProblemInstance:
    """Random instance whose correct option weakly dominates every crowd."""
    crowds = []
    for _ in range(k):
        probs = rng.dirichlet(np.ones(n))
        top = int(np.argmax(probs))
        probs[[x_star, top]] = probs[[top, x_star]]
        crowds.append(ResponseDistribution(probs))
    costs = rng.uniform(0.5, 3.0, size=k)
    return ProblemInstance(crowds, costs, x_star)


def random_mu(rng: np.random.Generator, k: int) -> np.ndarray:
    return rng.dirichlet(np.ones(k))
