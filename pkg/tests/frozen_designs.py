"""Frozen reservoir designs shared by the unit and acceptance suites.

All designs use theta = 0.05.  They cover separable and entangled pairs with
|epsilon| in {0, 0.03, 0.05}.
"""

from __future__ import annotations

import math

import numpy as np

from pairsqueeze import design
from pairsqueeze.interaction import QubitPairState
from pairsqueeze.squeezing import SqueezedTarget

THETA = 0.05


def _separable_from_grid(epsilon_magnitude: float, mu: float, row: int, col: int) -> QubitPairState:
    gg, ge, eg, ee, _ = design.separable_pairs_grid(epsilon_magnitude, mu, 64)
    return QubitPairState.normalized(gg[row, col], ge[row, col], eg[row, col], ee[row, col])


def _entangled_without_epsilon() -> QubitPairState:
    side = math.sqrt((1 - 0.8**2 - 0.55**2) / 2)
    return QubitPairState(0.8, 1j * side, -1j * side, 0.55 * np.exp(1j * math.pi / 3))


def entangled_with_epsilon(epsilon: float) -> QubitPairState:
    half = epsilon / 2
    side = math.sqrt((1 - 0.8**2 - 0.55**2 - 2 * half**2) / 2)
    return QubitPairState(0.8, half + 1j * side, half - 1j * side, 0.55 * np.exp(1j * math.pi / 3))


def _entangled_eps003() -> QubitPairState:
    side = math.sqrt((1 - 0.8**2 - 0.4**2 - 2 * 0.015**2) / 2)
    return QubitPairState(0.8, 0.015 + 1j * side, 0.015 - 1j * side, 0.4 * np.exp(1j * math.pi / 4))


def build_designs() -> dict[str, QubitPairState]:
    return {
        "loss": QubitPairState(1.0, 0.0, 0.0, 0.0),
        "alternating_u0.2": QubitPairState.alternating(0.2),
        "alternating_u0.45": QubitPairState.alternating(0.45),
        "entangled_eps0": _entangled_without_epsilon(),
        "entangled_eps0.03": _entangled_eps003(),
        "entangled_eps0.05_extremal": design.entangled_extremal_pair(0.05, 3.0),
        "separable_eps0.03": _separable_from_grid(0.03, 2.5, 10, 20),
        "separable_eps0.05": _separable_from_grid(0.05, 3.0, 10, 20),
        "tuned_eps0.05": design.tune_pair_for_target(SqueezedTarget(1.2, 0.3, math.pi / 2), THETA, 0.05),
    }


DESIGNS = build_designs()
DESIGN_NAMES = tuple(DESIGNS)
DISPLACED_NAMES = tuple(name for name, pair in DESIGNS.items() if abs(pair.epsilon) > 0)
