"""Standard surfaces used by tests and experiments."""

from __future__ import annotations

import numpy as np

from .graft import GraftedComplex, WeightedMulticurve
from .ortho import THETA, classify
from .pants import FNSurface, PantsDecomposition


def decomposition(name: str, genus: int = 2) -> PantsDecomposition:
    if name == "theta":
        return PantsDecomposition.theta()
    if name == "dumbbell":
        return PantsDecomposition.dumbbell()
    if name == "chain":
        return PantsDecomposition.chain(genus)
    raise ValueError(f"unknown decomposition {name!r}")


def symmetric_genus2() -> GraftedComplex:
    """Theta decomposition, all lengths 2, no twist, unit weights."""
    fn = FNSurface(PantsDecomposition.theta(), (2.0, 2.0, 2.0), (0.0, 0.0, 0.0))
    return GraftedComplex(fn, WeightedMulticurve((1.0, 1.0, 1.0)))


def generic_genus2() -> GraftedComplex:
    fn = FNSurface(PantsDecomposition.theta(), (2.0, 2.5, 3.0), (0.3, -0.7, 1.1))
    return GraftedComplex(fn, WeightedMulticurve((1.0, 0.8, 1.2)))


def chain_genus3() -> GraftedComplex:
    fn = FNSurface(
        PantsDecomposition.chain(3),
        (2.0, 2.2, 2.4, 2.6, 2.8, 3.0),
        (0.1, -0.2, 0.3, -0.4, 0.5, -0.6),
    )
    return GraftedComplex(fn, WeightedMulticurve((1.0, 0.5, 0.8, 1.1, 0.6, 0.9)))


def random_grafted(
    genus: int,
    rng: np.random.Generator,
    full_support: bool = False,
    theta_spines: bool = False,
) -> GraftedComplex:
    """Random lengths in [0.5, 4], twists in [-2, 2], weights in [0.1, 2].

    Without ``full_support`` each weight is zero with probability 1/5.  With
    ``theta_spines`` lengths are redrawn until every pants has a theta spine.
    """
    if genus == 2:
        dec = PantsDecomposition.theta() if rng.random() < 0.5 else PantsDecomposition.dumbbell()
    else:
        dec = PantsDecomposition.chain(genus)
    n = dec.n_curves
    while True:
        lengths = tuple(float(x) for x in rng.uniform(0.5, 4.0, n))
        fn = FNSurface(dec, lengths, tuple(float(x) for x in rng.uniform(-2.0, 2.0, n)))
        if not theta_spines or all(classify(*fn.pants_lengths(p))[0] == THETA for p in range(dec.n_pants)):
            break
    weights = rng.uniform(0.1, 2.0, n)
    if not full_support:
        weights = np.where(rng.random(n) < 0.2, 0.0, weights)
    return GraftedComplex(fn, WeightedMulticurve(tuple(float(a) for a in weights)))
