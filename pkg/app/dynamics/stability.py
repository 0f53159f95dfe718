"""Stability indices and classification of the heteroclinic cycles.

Two independent routes lead to the indices of a cycle:

* ``stability_indices_matrix_path`` works from the transition matrices: the
  dominant eigen-data of every composite matrix decides whether the cycle can
  attract anything, and the index of each connection is the smallest
  F-index over a finite family of exponent vectors.
* ``closed_form_indices`` evaluates the explicit formulas in the tie payoffs.

``classify`` turns either set of indices into one of the labels of
:class:`Classification`.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from app.dynamics.errors import BoundaryParams, DegenerateTrace, EigenMismatch, TieBreak
from app.dynamics.game_core import PayoffParams
from app.dynamics.maps import TransitionMatrix, cycle_transition_matrix, partial_products
from app.dynamics.network import Cycle, Node, get_cycle

logger = logging.getLogger(__name__)

BOUNDARY_BAND = 1e-8
EIGEN_TOLERANCE = 1e-8
REAL_TOLERANCE = 1e-10
TIE_TOLERANCE = 1e-10
TRACE_TOLERANCE = 1e-12
INF = math.inf


class Classification(str, Enum):
    EAS = 'EAS'
    FAS = 'FAS'
    CU = 'CU'
    NON_ATTRACTOR = 'NonAttractor'
    BOUNDARY = 'Boundary'


# ---------------------------------------------------------------------------
# Characteristic polynomial
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CharPolyData:
    """Coefficients of ``λ³ - tr·λ² + b·λ - det``."""

    tr: float
    b: float
    det: float

    def __call__(self, lam):
        return ((lam - self.tr) * lam + self.b) * lam - self.det


def _entries(matrix) -> np.ndarray:
    if isinstance(matrix, TransitionMatrix):
        return matrix.entries
    return np.asarray(matrix, dtype=float)


def char_poly(matrix) -> CharPolyData:
    m = _entries(matrix)
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    b = (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
         + m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0]
         + m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
    return CharPolyData(float(tr), float(b), float(np.linalg.det(m)))


def _sign_changes(sequence) -> int:
    signs = [math.copysign(1.0, v) for v in sequence if v != 0.0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def routh_hurwitz_sequence(cp: CharPolyData):
    if abs(cp.tr) < TRACE_TOLERANCE:
        raise DegenerateTrace(f"trace {cp.tr!r} is too close to zero for the Routh-Hurwitz table")
    return (-1.0, cp.tr, (cp.det - cp.b * cp.tr) / cp.tr, cp.det)


def routh_hurwitz_positive_count(cp: CharPolyData) -> int:
    """Number of characteristic roots with positive real part."""
    return _sign_changes(routh_hurwitz_sequence(cp))


def discriminant_value(eps_x: float, eps_y: float) -> float:
    """Discriminant of the C0 characteristic polynomial; defined on the closed square."""
    x, y = float(eps_x), float(eps_y)
    x2 = x * x
    return ((x2 - 9.0) ** 2 * y ** 4
            + (-80.0 * x2 * x - 432.0 * x) * y ** 3
            + (-18.0 * x2 * x2 - 396.0 * x2 - 162.0) * y ** 2
            + (-432.0 * x2 * x - 3024.0 * x) * y
            + 81.0 * x2 * x2 - 162.0 * x2 - 3375.0) / 256.0


def discriminant(params: PayoffParams) -> float:
    return discriminant_value(params.eps_x, params.eps_y)


def cubic_discriminant(cp: CharPolyData) -> float:
    """Discriminant of a monic cubic written through its trace, ``b`` and determinant."""
    t, b, d = cp.tr, cp.b, cp.det
    return 18.0 * t * b * d - 4.0 * t ** 3 * d + t * t * b * b - 4.0 * b ** 3 - 27.0 * d * d


# ---------------------------------------------------------------------------
# Eigenvalues
# ---------------------------------------------------------------------------

def cubic_roots(cp: CharPolyData) -> np.ndarray:
    """Roots of the characteristic cubic: a bracketed real root, then the deflated quadratic."""
    bound = 1.0 + max(abs(cp.tr), abs(cp.b), abs(cp.det))
    if cp(0.0) == 0.0:
        real_root = 0.0
    else:
        real_root = brentq(cp, -bound, bound, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    c1 = real_root - cp.tr
    c0 = cp.b + real_root * c1
    disc = c1 * c1 - 4.0 * c0
    if disc < 0.0:
        half = math.sqrt(-disc) / 2.0
        pair = [complex(-c1 / 2.0, half), complex(-c1 / 2.0, -half)]
    else:
        q = -(c1 + math.copysign(math.sqrt(disc), c1)) / 2.0
        pair = [complex(q), complex(c0 / q)] if q != 0.0 else [0j, 0j]
    return np.array([complex(real_root)] + pair)


def eigenvalues(matrix) -> np.ndarray:
    """Cubic-formula eigenvalues, cross-checked against the dense solver."""
    m = _entries(matrix)
    roots = cubic_roots(char_poly(m))
    dense = np.linalg.eigvals(m)
    for root in roots:
        gap = np.min(np.abs(dense - root))
        if gap > EIGEN_TOLERANCE * max(1.0, abs(root)):
            logger.warning("Eigenvalue cross-check failed: cubic %s vs dense %s", roots, dense)
            raise EigenMismatch(f"cubic root {root} has no dense counterpart within tolerance ({dense})")
    return roots


@dataclass(frozen=True)
class DominanceData:
    lambda_max: complex
    eigenvalues: np.ndarray = field(repr=False)
    w_max: Optional[np.ndarray]
    v_max: Optional[np.ndarray]
    cond_i: bool
    cond_ii: bool
    cond_iii: Optional[bool]
    cond_iii_printed: Optional[bool] = None

    @property
    def satisfied(self) -> bool:
        return bool(self.cond_i and self.cond_ii and self.cond_iii)


def _normalise_direction(vector: np.ndarray) -> np.ndarray:
    vector = vector / np.linalg.norm(vector)
    for component in vector:
        if abs(component) > 1e-14:
            return vector if component > 0 else -vector
    return vector


def _eigenvector(m: np.ndarray, target: complex) -> np.ndarray:
    values, vectors = np.linalg.eig(m)
    column = vectors[:, int(np.argmin(np.abs(values - target)))]
    return np.real(column)


def dominance(matrix) -> DominanceData:
    """Maximum-modulus eigenvalue of a transition matrix and the conditions on it."""
    m = _entries(matrix)
    roots = eigenvalues(m)
    order = sorted(range(3), key=lambda i: (-abs(roots[i]), -roots[i].imag))
    top, second = roots[order[0]], roots[order[1]]
    scale = max(1.0, abs(top))
    is_pair = abs(top.imag) > REAL_TOLERANCE * scale and abs(second - top.conjugate()) < TIE_TOLERANCE * scale
    if abs(abs(top) - abs(second)) < TIE_TOLERANCE * scale and not is_pair:
        raise TieBreak(f"eigenvalues {top} and {second} share the maximal modulus")

    lam = top
    cond_i = abs(lam.imag) < REAL_TOLERANCE * scale
    cond_ii = bool(cond_i and lam.real > 1.0 + REAL_TOLERANCE)
    w_max = v_max = None
    cond_iii = cond_iii_printed = None
    if cond_i:
        w_max = _normalise_direction(_eigenvector(m, lam.real))
        left = _eigenvector(m.T, lam.real)
        v_max = left / float(left @ w_max)
    if cond_i and cond_ii:
        cond_iii = bool(np.all(w_max > 0.0))
        cond_iii_printed = bool(all(w_max[i] * w_max[j] > 1.0 for i in range(3) for j in range(i + 1, 3)))
        logger.debug(
            "Dominance: lambda=%s w=%s same-sign=%s printed-product=%s",
            lam.real, w_max, cond_iii, cond_iii_printed,
        )
    return DominanceData(
        lambda_max=complex(lam.real, 0.0) if cond_i else lam,
        eigenvalues=roots,
        w_max=w_max,
        v_max=v_max,
        cond_i=bool(cond_i),
        cond_ii=cond_ii,
        cond_iii=cond_iii,
        cond_iii_printed=cond_iii_printed,
    )


def c0_dominant_eigenvector(params: PayoffParams, lambda_max: float) -> np.ndarray:
    """Closed-form direction of the dominant eigenvector of C0's composite at ξ0.

    Proportional to ``(λ + (1+εy)/2, (3+εy²)/4, λ² - tr·λ + b + (1-εy)/2)``.
    Since the composite has determinant 1, ``λ² - tr·λ + b`` equals ``1/λ``.
    """
    y = params.eps_y
    cp = char_poly(cycle_transition_matrix('C0', Node.XI0, params))
    vector = np.array([
        lambda_max + (1 + y) / 2,
        (3 + y * y) / 4,
        lambda_max ** 2 - cp.tr * lambda_max + cp.b + (1 - y) / 2,
    ])
    return _normalise_direction(vector)


# ---------------------------------------------------------------------------
# F-index
# ---------------------------------------------------------------------------

def _zero_sum(alpha) -> bool:
    return abs(sum(alpha)) <= 1e-12 * max(abs(a) for a in alpha)


def f_plus(alpha) -> float:
    alpha = [float(a) for a in alpha]
    if min(alpha) >= 0.0:
        return INF
    if sum(alpha) <= 0.0 or _zero_sum(alpha):
        return 0.0
    return -sum(alpha) / min(alpha)


def f_minus(alpha) -> float:
    return f_plus([-a for a in alpha])


def f_index(alpha) -> float:
    """Stability index contributed by an exponent vector (extended real)."""
    alpha = [float(a) for a in alpha]
    low, high, total = min(alpha), max(alpha), sum(alpha)
    if low >= 0.0:
        return INF
    if high <= 0.0:
        return -INF
    if _zero_sum(alpha):
        return 0.0
    if total > 0.0:
        return -total / low
    return total / high


# ---------------------------------------------------------------------------
# Governing quantities and closed forms
# ---------------------------------------------------------------------------

def b1(params: PayoffParams) -> float:
    x, y = params.eps_x, params.eps_y
    return (5 - x) * y * y + (x * x + 10 * x + 1) * y - (1 - x) * (4 + 5 * x)


def b2(params: PayoffParams) -> float:
    x, y = params.eps_x, params.eps_y
    return (5 + x) * y * y + (-x * x + 10 * x - 1) * y - (1 + x) * (4 - 5 * x)


def governing_quantities(cycle, params: PayoffParams) -> dict:
    """Sign conditions whose zero sets bound the stability regions of ``cycle``."""
    cycle = get_cycle(cycle)
    quantities = {'sum': params.eps_x + params.eps_y}
    if cycle.id in ('C1', 'C2'):
        quantities['difference'] = params.eps_x - params.eps_y
        quantities['b1' if cycle.id == 'C1' else 'b2'] = (b1 if cycle.id == 'C1' else b2)(params)
    return quantities


def on_boundary(cycle, params: PayoffParams, band: float = BOUNDARY_BAND) -> bool:
    return any(abs(v) < band for v in governing_quantities(cycle, params).values())


def _all_minus_inf(cycle: Cycle) -> dict:
    return {node: -INF for node in cycle.nodes}


def closed_form_indices(cycle, params: PayoffParams, band: float = BOUNDARY_BAND) -> dict:
    """Stability indices from the explicit formulas, keyed by node."""
    cycle = get_cycle(cycle)
    if on_boundary(cycle, params, band):
        raise BoundaryParams(f"{cycle.id} at ({params.eps_x}, {params.eps_y}) is on a stability boundary")
    x, y = params.eps_x, params.eps_y
    s, d = x + y, x - y

    if cycle.id == 'C0':
        if s >= 0:
            return _all_minus_inf(cycle)
        return {
            Node.XI0: min((1 - x) / (1 + x), (1 - y) ** 2 / (2 * (1 + y))),
            Node.XI1: min((1 - y) / (1 + y), (1 - x) ** 2 / (2 * (1 + x))),
        }
    if cycle.id == 'C1':
        if s <= 0 or b1(params) <= 0 or d >= 0:
            return _all_minus_inf(cycle)
        return {
            Node.XI1: (-4 + x + (3 - x) * y + y * y) / ((1 - x) * (1 + y)),
            Node.XI2: min((y - x) / (1 - y), (1 + 2 * x + y * y) / (2 * (1 - x))),
        }
    if cycle.id == 'C2':
        if s <= 0 or b2(params) <= 0 or d <= 0:
            return _all_minus_inf(cycle)
        return {
            Node.XI0: (-4 + y + (3 - y) * x + x * x) / ((1 - y) * (1 + x)),
            Node.XI2: min((x - y) / (1 - x), (1 + 2 * y + x * x) / (2 * (1 - y))),
        }
    return _all_minus_inf(cycle)


def stability_indices_matrix_path(cycle, params: PayoffParams, band: float = BOUNDARY_BAND) -> dict:
    """Stability indices from the transition matrices, keyed by node.

    If a composite matrix fails one of the dominance conditions every index
    is -inf. Otherwise the index at node j is the minimum F-index over the
    normalised left eigenvector of the composite at j and the rows of the
    partial products ``M_j``, ``M_{j+1} M_j``, ..., up to the composite.
    """
    cycle = get_cycle(cycle)
    if on_boundary(cycle, params, band):
        raise BoundaryParams(f"{cycle.id} at ({params.eps_x}, {params.eps_y}) is on a stability boundary")

    data = {}
    for node in cycle.nodes:
        dom = dominance(cycle_transition_matrix(cycle, node, params))
        if dom.cond_i and abs(dom.lambda_max.real - 1.0) < band:
            raise BoundaryParams(f"dominant eigenvalue of {cycle.id} at {node.label} is 1 within {band}")
        if not dom.satisfied:
            return _all_minus_inf(cycle)
        data[node] = dom

    indices = {}
    for node in cycle.nodes:
        family = [data[node].v_max]
        for product in partial_products(cycle, node, params):
            family.extend(product)
        indices[node] = min(f_index(beta) for beta in family)
    return indices


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StabilityReport:
    cycle: str
    params: PayoffParams
    indices: dict
    classification: Classification

    def to_dict(self, encode=None):
        encode = encode or (lambda v: v)
        return {
            'cycle': self.cycle,
            'eps_x': self.params.eps_x,
            'eps_y': self.params.eps_y,
            'sigma': {node.label: encode(value) for node, value in self.indices.items()},
            'classification': self.classification.value,
        }


def classification_from_indices(cycle: Cycle, indices: dict) -> Classification:
    values = list(indices.values())
    if all(v == -INF for v in values):
        return Classification.NON_ATTRACTOR if cycle.id == 'C0' else Classification.CU
    if all(v > 0 for v in values):
        return Classification.EAS
    return Classification.FAS


def classify(cycle, params: PayoffParams, band: float = BOUNDARY_BAND,
             method: str = 'closed_form') -> StabilityReport:
    """Stability class of ``cycle`` at ``params``; parameters within ``band``
    of a governing sign condition are reported as Boundary."""
    cycle = get_cycle(cycle)
    compute = stability_indices_matrix_path if method == 'matrix' else closed_form_indices
    try:
        indices = compute(cycle, params, band)
    except BoundaryParams:
        return StabilityReport(cycle.id, params, {}, Classification.BOUNDARY)
    return StabilityReport(cycle.id, params, indices, classification_from_indices(cycle, indices))


# ---------------------------------------------------------------------------
# Region curves
# ---------------------------------------------------------------------------

def curve_a(eps_x: float) -> float:
    return -eps_x


def curve_b(eps_x: float) -> float:
    return eps_x


def curve_c(eps_x: float) -> float:
    """Positive root in eps_y of ``b2``: the C2 stability boundary."""
    x = eps_x
    return (1 - 10 * x + x * x + math.sqrt(81 - 24 * x - 2 * x * x - 40 * x ** 3 + x ** 4)) / (2 * (5 + x))


def curve_d(eps_x: float) -> float:
    """Positive root in eps_y of ``b1``: the C1 stability boundary."""
    x = eps_x
    return (-(1 + 10 * x + x * x) + math.sqrt(81 + 24 * x - 2 * x * x + 40 * x ** 3 + x ** 4)) / (2 * (5 - x))
