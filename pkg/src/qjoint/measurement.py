"""POVMs, square-root operators, outcome probabilities, post-measurement states.

A measurement is a set of PSD operators ``{Q^x}`` summing to the identity.
Each element carries a chosen square root ``R^x`` with ``Q^x = R^x† R^x``; we
fix the unique Hermitian PSD root, so for projective measurements the root is
the projector itself.  Sequences of measurements over an ascending index set
``s`` compose as

    R_s^y = R_{s(1)}^{y_1} @ R_{s(2)}^{y_2} @ ... @ R_{s(t)}^{y_t}

i.e. the rightmost factor (highest index) is applied to the state first, and
``Q_s^y = R_s^y† R_s^y``.

Measurement indices are 1-based throughout the public API; index sets are
strictly ascending tuples of those indices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    NotProjector,
    NotPsd,
    UnknownOutcome,
    ZeroProbabilityBranch,
)
from .linalg import (
    TAU_HERM,
    TAU_PROB,
    TAU_PSD,
    as_matrix,
    check_hermitian,
    check_projector,
    check_square,
    psd_sqrt,
    trace_inner,
)

__all__ = [
    "SquareRootOperator",
    "Povm",
    "MeasurementFamily",
    "binary_projector_povm",
    "check_index_set",
    "check_outcome_tuple",
    "outcome_probability",
    "post_measurement_state",
    "sequence_root",
    "sequence_povm_element",
]


@dataclass(frozen=True)
class SquareRootOperator:
    """A measurement element's square root ``R^x``, tagged with its outcome."""

    outcome: int
    matrix: np.ndarray


@dataclass
class Povm:
    """A POVM ``{Q^x}`` with chosen square roots, validated on construction.

    Treat instances as immutable after construction.
    """

    dim: int
    outcomes: tuple[int, ...]
    elements: list[np.ndarray]
    roots: list[np.ndarray]
    tol: float = TAU_HERM

    def __post_init__(self) -> None:
        if len(self.outcomes) != len(self.elements) or len(self.elements) != len(self.roots):
            raise DimensionMismatch("outcomes, elements and roots must align")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise ValueError(f"duplicate outcome labels: {self.outcomes}")
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for q, r in zip(self.elements, self.roots):
            if q.shape != (self.dim, self.dim) or r.shape != (self.dim, self.dim):
                raise DimensionMismatch("element shape does not match POVM dimension")
            check_hermitian(q, self.tol)
            w = np.linalg.eigvalsh(q)
            # Entrywise perturbations move eigenvalues by up to dim times as much.
            if w[0] < -self.dim * max(self.tol, TAU_PSD):
                raise NotPsd(f"POVM element has eigenvalue {w[0]:.3e}")
            if np.abs(r.conj().T @ r - q).max() > self.dim * self.tol:
                raise ValueError("square root does not reproduce its POVM element")
            total += q
        ident_dev = np.abs(total - np.eye(self.dim)).max()
        if ident_dev > self.dim * self.tol:
            raise ValueError(f"POVM elements sum to identity only within {ident_dev:.3e}")
        self._index = {x: k for k, x in enumerate(self.outcomes)}

    @classmethod
    def from_elements(
        cls, elements, outcomes: tuple[int, ...] | None = None, tol: float = TAU_HERM
    ) -> "Povm":
        """Build a POVM from its elements, deriving Hermitian PSD square roots."""
        mats = [as_matrix(q) for q in elements]
        dim = check_square(mats[0])
        if outcomes is None:
            outcomes = tuple(range(len(mats)))
        roots = [psd_sqrt(q, max(tol, TAU_PSD)) for q in mats]
        return cls(dim=dim, outcomes=tuple(outcomes), elements=mats, roots=roots, tol=tol)

    def _at(self, outcome: int) -> int:
        try:
            return self._index[outcome]
        except KeyError:
            raise UnknownOutcome(
                f"outcome {outcome!r} not among {self.outcomes}"
            ) from None

    def element(self, outcome: int) -> np.ndarray:
        return self.elements[self._at(outcome)]

    def root(self, outcome: int) -> np.ndarray:
        return self.roots[self._at(outcome)]

    def root_operator(self, outcome: int) -> SquareRootOperator:
        return SquareRootOperator(outcome, self.root(outcome))


def binary_projector_povm(p, tol: float = TAU_HERM) -> Povm:
    """The two-outcome measurement {0: 1-P, 1: P} of a projector P.

    The projectors themselves serve as square roots, so sequenced operators
    are literally products of the given matrices (no spectral regularization).
    """
    p = as_matrix(p)
    dim = check_square(p)
    idem = np.abs(p @ p - p).max()
    herm = np.abs(p - p.conj().T).max()
    if idem > tol or herm > tol:
        raise NotProjector(
            f"binary measurement needs a projector; residuals idem={idem:.3e} herm={herm:.3e}"
        )
    comp = np.eye(dim) - p
    return Povm(
        dim=dim,
        outcomes=(0, 1),
        elements=[comp, p],
        roots=[comp.copy(), p.copy()],
        tol=tol,
    )


@dataclass
class MeasurementFamily:
    """An ordered family of POVMs on a common Hilbert space (indices 1..n)."""

    povms: list[Povm]
    projective: bool = field(default=False)

    def __post_init__(self) -> None:
        if not self.povms:
            raise ValueError("a measurement family needs at least one POVM")
        dims = {p.dim for p in self.povms}
        if len(dims) != 1:
            raise DimensionMismatch(f"POVMs of mixed dimension: {sorted(dims)}")

    @classmethod
    def binary_projective(cls, projectors, tol: float = TAU_HERM) -> "MeasurementFamily":
        povms = [binary_projector_povm(p, tol) for p in projectors]
        return cls(povms=povms, projective=True)

    @classmethod
    def from_povms(cls, povms: list[Povm]) -> "MeasurementFamily":
        projective = all(
            np.abs(q @ q - q).max() <= 100 * max(p.tol, TAU_HERM)
            for p in povms
            for q in p.elements
        )
        return cls(povms=list(povms), projective=projective)

    @property
    def n(self) -> int:
        return len(self.povms)

    @property
    def dim(self) -> int:
        return self.povms[0].dim

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(range(1, self.n + 1))

    def povm(self, index: int) -> Povm:
        """The POVM with 1-based index."""
        if not 1 <= index <= self.n:
            raise DimensionMismatch(f"measurement index {index} outside 1..{self.n}")
        return self.povms[index - 1]

    def outcome_tuples(self, s: tuple[int, ...]):
        """All outcome tuples for the ascending index set ``s``."""
        return itertools.product(*(self.povm(i).outcomes for i in s))


def check_index_set(s, n: int, allow_empty: bool = True) -> tuple[int, ...]:
    """Validate a strictly ascending tuple of 1-based measurement indices."""
    s = tuple(s)
    if not s:
        if allow_empty:
            return s
        raise ValueError("index set must be non-empty")
    if any(not 1 <= i <= n for i in s):
        raise DimensionMismatch(f"index set {s} outside 1..{n}")
    if any(a >= b for a, b in zip(s, s[1:])):
        raise ValueError(f"index set {s} must be strictly ascending")
    return s


def check_outcome_tuple(family: MeasurementFamily, s: tuple[int, ...], y) -> tuple[int, ...]:
    y = tuple(y)
    if len(y) != len(s):
        raise DimensionMismatch(f"outcome tuple {y} does not match index set {s}")
    for i, x in zip(s, y):
        family.povm(i)._at(x)  # raises UnknownOutcome
    return y


def outcome_probability(povm: Povm, outcome: int, rho: np.ndarray) -> float:
    """P[x] = Tr(Q^x rho), clamped to [0, 1]."""
    rho = as_matrix(rho)
    if rho.shape != (povm.dim, povm.dim):
        raise DimensionMismatch(
            f"state of shape {rho.shape} against POVM of dimension {povm.dim}"
        )
    p = trace_inner(povm.element(outcome), rho)
    return min(max(p, 0.0), 1.0)


def post_measurement_state(
    root, rho: np.ndarray, prob_tol: float = TAU_PROB
) -> tuple[np.ndarray, float]:
    """(R rho R† / p, p) with p = Tr(R† R rho); raises on a dead branch.

    ``root`` may be a SquareRootOperator or a bare matrix.
    """
    r = root.matrix if isinstance(root, SquareRootOperator) else as_matrix(root)
    rho = as_matrix(rho)
    if r.shape[1] != rho.shape[0]:
        raise DimensionMismatch(f"root shape {r.shape} against state shape {rho.shape}")
    out = r @ rho @ r.conj().T
    p = float(np.trace(out).real)
    if p <= prob_tol:
        raise ZeroProbabilityBranch(
            f"branch probability {p:.3e} at or below threshold {prob_tol:.3e}"
        )
    state = out / p
    return (state + state.conj().T) / 2.0, p


def sequence_root(
    family: MeasurementFamily, s: tuple[int, ...], y: tuple[int, ...]
) -> np.ndarray:
    """R_s^y: product of single-measurement roots in ascending index order.

    The rightmost factor (largest index) acts on the state first.  The empty
    index set gives the identity.
    """
    s = check_index_set(s, family.n)
    y = check_outcome_tuple(family, s, y)
    out = np.eye(family.dim, dtype=complex)
    for i, x in zip(s, y):
        out = out @ family.povm(i).root(x)
    return out


def sequence_povm_element(
    family: MeasurementFamily, s: tuple[int, ...], y: tuple[int, ...]
) -> np.ndarray:
    """Q_s^y = R_s^y† R_s^y (Hermitian PSD by construction)."""
    r = sequence_root(family, s, y)
    q = r.conj().T @ r
    return (q + q.conj().T) / 2.0
