"""Payoff structure and replicator vector field for the parametrised
Rock-Scissors-Paper game.

Strategies are indexed (R, S, P) = (0, 1, 2) everywhere in the package. A
state of the game is a pair of mixed strategies ``(x; y)`` stored as a length-6
array ``(x1, x2, x3, y1, y2, y3)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from app.dynamics.errors import InvalidParams, InvalidState

STRATEGIES = ("R", "S", "P")
SIMPLEX_TOLERANCE = 1e-12

# gamma acts as the cyclic shift x -> (x3, x1, x2), y -> (y3, y1, y2)
GAMMA_INDEX = np.array([2, 0, 1, 5, 3, 4])
GAMMA_INVERSE_INDEX = np.argsort(GAMMA_INDEX)


@dataclass(frozen=True)
class PayoffParams:
    """Tie payoffs of players X and Y, each in the open interval (-1, 1)."""

    eps_x: float
    eps_y: float

    def __post_init__(self):
        for name in ("eps_x", "eps_y"):
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise InvalidParams(f"{name} must be a real number, got {value!r}")
            if not (-1.0 < value < 1.0):
                raise InvalidParams(f"{name} must lie in (-1, 1), got {value}")
            object.__setattr__(self, name, value)

    def swapped(self) -> PayoffParams:
        return PayoffParams(self.eps_y, self.eps_x)

    def to_dict(self):
        return {'eps_x': self.eps_x, 'eps_y': self.eps_y}


@dataclass(frozen=True)
class SimplexPoint:
    """A mixed strategy over (R, S, P)."""

    p1: float
    p2: float
    p3: float

    def __post_init__(self):
        coords = np.array([self.p1, self.p2, self.p3], dtype=float)
        if not np.all(np.isfinite(coords)):
            raise InvalidState(f"simplex coordinates must be finite, got {coords.tolist()}")
        if np.any(coords < 0.0):
            raise InvalidState(f"simplex coordinates must be nonnegative, got {coords.tolist()}")
        total = coords.sum()
        if abs(total - 1.0) > SIMPLEX_TOLERANCE:
            raise InvalidState(f"simplex coordinates must sum to 1, got sum {total!r}")
        coords = coords / total
        object.__setattr__(self, "p1", float(coords[0]))
        object.__setattr__(self, "p2", float(coords[1]))
        object.__setattr__(self, "p3", float(coords[2]))

    @classmethod
    def vertex(cls, index: int) -> SimplexPoint:
        coords = [0.0, 0.0, 0.0]
        coords[index] = 1.0
        return cls(*coords)

    def as_array(self) -> np.ndarray:
        return np.array([self.p1, self.p2, self.p3])


@dataclass(frozen=True)
class GameState:
    """A point of the state space: player X strategy ``x``, player Y strategy ``y``."""

    x: SimplexPoint
    y: SimplexPoint

    @classmethod
    def from_array(cls, values) -> GameState:
        values = np.asarray(values, dtype=float)
        if values.shape != (6,):
            raise InvalidState(f"a game state has 6 coordinates, got shape {values.shape}")
        return cls(SimplexPoint(*values[:3]), SimplexPoint(*values[3:]))

    @classmethod
    def vertex(cls, p: int, q: int) -> GameState:
        """Pure-strategy state where X plays ``p`` and Y plays ``q``."""
        return cls(SimplexPoint.vertex(p), SimplexPoint.vertex(q))

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.x.as_array(), self.y.as_array()])

    def gamma(self, power: int = 1) -> GameState:
        return GameState.from_array(apply_gamma(self.as_array(), power))

    def pure_strategies(self):
        """Return ``(p, q)`` if the state is a vertex, else ``None``."""
        z = self.as_array()
        xs = np.flatnonzero(z[:3] == 1.0)
        ys = np.flatnonzero(z[3:] == 1.0)
        if xs.size == 1 and ys.size == 1:
            return int(xs[0]), int(ys[0])
        return None

    def label(self) -> str:
        pure = self.pure_strategies()
        if pure is None:
            return "(" + ",".join(f"{v:.6g}" for v in self.as_array()) + ")"
        return f"({STRATEGIES[pure[0]]},{STRATEGIES[pure[1]]})"


@dataclass(frozen=True)
class PayoffMatrixPair:
    """Payoff matrices of players X (``a``) and Y (``b``), rows/columns in (R, S, P) order."""

    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)

    def to_dict(self):
        return {'a': self.a.tolist(), 'b': self.b.tolist()}


def _rsp_matrix(eps: float) -> np.ndarray:
    win, lose = 1.0 - eps, -1.0 - eps
    matrix = np.array([
        [0.0, win, lose],
        [lose, 0.0, win],
        [win, lose, 0.0],
    ])
    matrix.setflags(write=False)
    return matrix


@lru_cache(maxsize=4096)
def _payoff_pair(eps_x: float, eps_y: float) -> PayoffMatrixPair:
    return PayoffMatrixPair(_rsp_matrix(eps_x), _rsp_matrix(eps_y))


def payoff_matrices(params: PayoffParams) -> PayoffMatrixPair:
    """Return the normalised payoff matrices A (player X) and B (player Y).

    A has zero diagonal, ``1 - eps_x`` where the row strategy beats the column
    strategy and ``-1 - eps_x`` where it loses; B likewise with ``eps_y``.
    The arrays are read-only and shared between calls.
    """
    return _payoff_pair(params.eps_x, params.eps_y)


def field_array(z: np.ndarray, pair: PayoffMatrixPair) -> np.ndarray:
    """Replicator field on an array of states with trailing dimension 6."""
    x, y = z[..., :3], z[..., 3:]
    ay = y @ pair.a.T
    bx = x @ pair.b.T
    dx = x * (ay - np.sum(x * ay, axis=-1, keepdims=True))
    dy = y * (bx - np.sum(y * bx, axis=-1, keepdims=True))
    return np.concatenate([dx, dy], axis=-1)


def replicator_field(state: GameState, params: PayoffParams) -> np.ndarray:
    """Evaluate the coupled replicator equations at ``state``.

    Returns ``(dx1, dx2, dx3, dy1, dy2, dy3)`` with
    ``dx_i = x_i((Ay)_i - x.Ay)`` and ``dy_j = y_j((Bx)_j - y.Bx)``.
    """
    return field_array(state.as_array(), payoff_matrices(params))


def nash_point() -> GameState:
    third = 1.0 / 3.0
    return GameState(SimplexPoint(third, third, third), SimplexPoint(third, third, third))


def apply_gamma(z: np.ndarray, power: int = 1) -> np.ndarray:
    """Apply the symmetry generator ``power`` times along the last axis."""
    power %= 3
    out = np.asarray(z)
    for _ in range(power):
        out = out[..., GAMMA_INDEX]
    return out


def apply_gamma_inverse(z: np.ndarray) -> np.ndarray:
    return np.asarray(z)[..., GAMMA_INVERSE_INDEX]


def all_vertices():
    """The nine pure-strategy states as ``(p, q)`` pairs, X strategy first."""
    return [(p, q) for p in range(3) for q in range(3)]
