"""Simultaneous block decomposition of two projectors and the commuting repair.

Two orthogonal projectors decompose the space into one-dimensional common
eigenvectors and two-dimensional blocks on which the pair acts like a
rotation by a principal angle.  Snapping each two-dimensional part of the
second projector to the nearest block axis gives a projector that commutes
with the first exactly and moves any fixed state by at most sqrt(2) times
that state's commutation defect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailure, DegeneratePairingFailure
from .linalg import (
    ANGLE_SNAP,
    TAU_HERM,
    as_matrix,
    check_projector,
    check_same_dim,
    check_state_vector,
    frobenius_norm,
    vector_norm,
)

__all__ = [
    "OneDimBlock",
    "TwoDimBlock",
    "JordanDecomposition",
    "RepairResult",
    "jordan_decompose",
    "repair_projector",
]


@dataclass(frozen=True)
class OneDimBlock:
    """A shared eigenvector: P1 u = lambda1 u and P2 u = lambda2 u with bits."""

    u: np.ndarray
    lambda1: int
    lambda2: int


@dataclass(frozen=True)
class TwoDimBlock:
    """Span{v1, v1_perp} with P1 = |v1><v1| and P2 = |v2><v2| on the block.

    ``v2 = cos(theta) v1 + sin(theta) v1_perp`` for the principal angle
    ``theta`` strictly inside (0, pi/2).
    """

    v1: np.ndarray
    v1_perp: np.ndarray
    theta: float

    @property
    def v2(self) -> np.ndarray:
        return math.cos(self.theta) * self.v1 + math.sin(self.theta) * self.v1_perp


@dataclass
class JordanDecomposition:
    """Complete simultaneous block structure of a projector pair."""

    one_dim_blocks: list[OneDimBlock]
    two_dim_blocks: list[TwoDimBlock]
    dim: int

    def basis(self) -> np.ndarray:
        """All block vectors as columns, in a fixed deterministic order."""
        cols = [b.u for b in self.one_dim_blocks]
        for b in self.two_dim_blocks:
            cols.extend([b.v1, b.v1_perp])
        return np.column_stack(cols) if cols else np.zeros((self.dim, 0), dtype=complex)

    def reconstruct_p1(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for b in self.one_dim_blocks:
            if b.lambda1:
                out += np.outer(b.u, b.u.conj())
        for b in self.two_dim_blocks:
            out += np.outer(b.v1, b.v1.conj())
        return out

    def reconstruct_p2(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for b in self.one_dim_blocks:
            if b.lambda2:
                out += np.outer(b.u, b.u.conj())
        for b in self.two_dim_blocks:
            v2 = b.v2
            out += np.outer(v2, v2.conj())
        return out

    def residuals(self, p1: np.ndarray, p2: np.ndarray) -> dict[str, float]:
        """Max-entry reconstruction errors and basis orthonormality defect."""
        basis = self.basis()
        gram = basis.conj().T @ basis
        return {
            "p1_reconstruction": float(np.abs(self.reconstruct_p1() - p1).max()),
            "p2_reconstruction": float(np.abs(self.reconstruct_p2() - p2).max()),
            "orthonormality": float(np.abs(gram - np.eye(basis.shape[1])).max()),
        }


@dataclass
class RepairResult:
    """The commuting replacement P2' and how far it sits from P2 on the state."""

    p2_prime: np.ndarray
    epsilon: float
    on_state_distance: float
    commutator_norm: float
    decomposition: JordanDecomposition
    identity_residual: float
    block_terms: list[dict] = field(default_factory=list)

    @property
    def bound_margin(self) -> float:
        """Slack in on_state_distance <= sqrt(2) * epsilon."""
        return math.sqrt(2.0) * self.epsilon - self.on_state_distance


def _split_by_eigenvalue(p: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases of range and kernel of a projector, as column stacks."""
    vals, vecs = np.linalg.eigh(p)
    in_range = vals > 0.5
    if float(np.abs(vals - np.round(vals)).max()) > max(tol, 1e-7):
        raise ConvergenceFailure("projector spectrum not within tolerance of {0, 1}")
    return vecs[:, in_range], vecs[:, ~in_range]


def jordan_decompose(
    p1, p2, tol: float = TAU_HERM, snap: float = ANGLE_SNAP
) -> JordanDecomposition:
    """Simultaneously block-diagonalize two projectors.

    The compression of ``p2`` onto the range of ``p1`` is diagonalized; its
    eigenvalues are the squared cosines of the principal angles.  Eigenvalues
    within ``snap`` of 0 or 1 become one-dimensional blocks (commuting
    directions); interior eigenvalues seed two-dimensional blocks whose
    kernel-side partner is ``(p2 - cos^2 theta) v1`` normalized.  Leftover
    kernel directions must be eigenvectors of ``p2``; if not, the pairing is
    inconsistent and :class:`DegeneratePairingFailure` is raised.
    """
    p1 = check_projector(p1, tol)
    p2 = check_projector(p2, tol)
    dim = check_same_dim(p1, p2)
    range1, kernel1 = _split_by_eigenvalue(p1, tol)

    one_dim: list[OneDimBlock] = []
    two_dim: list[TwoDimBlock] = []

    if range1.shape[1]:
        compression = range1.conj().T @ p2 @ range1
        compression = (compression + compression.conj().T) / 2.0
        cvals, cvecs = np.linalg.eigh(compression)
        for c, w in zip(cvals, cvecs.T):
            v1 = range1 @ w
            v1 = v1 / vector_norm(v1)
            c = min(max(float(c), 0.0), 1.0)
            if c >= 1.0 - snap:
                one_dim.append(OneDimBlock(u=v1, lambda1=1, lambda2=1))
                continue
            if c <= snap:
                one_dim.append(OneDimBlock(u=v1, lambda1=1, lambda2=0))
                continue
            partner = p2 @ v1 - c * v1
            norm = vector_norm(partner)
            if norm <= max(tol, snap):
                raise DegeneratePairingFailure(
                    f"partner vector for cos^2 theta = {c:.6g} has norm {norm:.3e}"
                )
            theta = math.acos(math.sqrt(c))
            two_dim.append(TwoDimBlock(v1=v1, v1_perp=partner / norm, theta=theta))

    # Kernel directions not consumed as two-dim partners are common eigenvectors.
    leftover = kernel1
    if two_dim and kernel1.shape[1]:
        perps = np.column_stack([b.v1_perp for b in two_dim])
        leftover = kernel1 - perps @ (perps.conj().T @ kernel1)
    expected = kernel1.shape[1] - len(two_dim)
    if expected < 0:
        raise DegeneratePairingFailure(
            f"{len(two_dim)} two-dim blocks exceed kernel dimension {kernel1.shape[1]}"
        )
    if expected > 0:
        u_mat, svals, _ = np.linalg.svd(leftover, full_matrices=False)
        if svals[expected - 1] < 0.1 or (expected < len(svals) and svals[expected] > 0.1):
            raise DegeneratePairingFailure(
                "kernel complement dimension is ambiguous "
                f"(singular values {np.array2string(svals, precision=3)})"
            )
        rest = u_mat[:, :expected]
        kcomp = rest.conj().T @ p2 @ rest
        kcomp = (kcomp + kcomp.conj().T) / 2.0
        kvals, kvecs = np.linalg.eigh(kcomp)
        class_tol = max(100.0 * snap, dim * tol)
        for mu, w in zip(kvals, kvecs.T):
            u = rest @ w
            u = u / vector_norm(u)
            lam2 = int(round(float(mu)))
            if lam2 not in (0, 1) or abs(float(mu) - lam2) > class_tol:
                raise DegeneratePairingFailure(
                    f"kernel direction has p2 expectation {float(mu):.6g}, "
                    "not a common eigenvector"
                )
            one_dim.append(OneDimBlock(u=u, lambda1=0, lambda2=lam2))

    dec = JordanDecomposition(one_dim_blocks=one_dim, two_dim_blocks=two_dim, dim=dim)
    res = dec.residuals(p1, p2)
    limit = dim * max(tol, 1e-12)
    if max(res["p1_reconstruction"], res["p2_reconstruction"]) > limit or res[
        "orthonormality"
    ] > limit:
        raise ConvergenceFailure(f"decomposition residuals too large: {res}")
    return dec


def repair_projector(
    p1, p2, psi, tol: float = TAU_HERM, debug: bool = False
) -> RepairResult:
    """Replace ``p2`` by the nearest block-axis projector commuting with ``p1``.

    Each two-dimensional block contributes ``|v1><v1|`` when its angle is at
    most pi/4 and ``|v1_perp><v1_perp|`` otherwise; one-dimensional blocks
    keep their ``p2`` eigenvalue.  Guarantees, with
    ``epsilon = ||(p1 p2 - p2 p1) psi||``:

    - ``||(p2' - p2) psi|| <= sqrt(2) * epsilon``,
    - ``[p1, p2'] = 0`` and ``p2'`` is a projector (up to numerics),
    - the exact accounting ``epsilon^2 = sum_k sin^2 cos^2 (|<v_perp|psi>|^2
      + |<v1|psi>|^2)`` over two-dimensional blocks.
    """
    p1 = check_projector(p1, tol)
    p2 = check_projector(p2, tol)
    psi = check_state_vector(psi)
    dim = check_same_dim(p1, p2)
    dec = jordan_decompose(p1, p2, tol)

    p2_prime = np.zeros((dim, dim), dtype=complex)
    for b in dec.one_dim_blocks:
        if b.lambda2:
            p2_prime += np.outer(b.u, b.u.conj())

    epsilon = vector_norm(p1 @ (p2 @ psi) - p2 @ (p1 @ psi))
    identity_sum = 0.0
    distance_sq = 0.0
    block_terms: list[dict] = []
    for b in dec.two_dim_blocks:
        c, s = math.cos(b.theta), math.sin(b.theta)
        keep_v1 = b.theta <= math.pi / 4.0
        axis = b.v1 if keep_v1 else b.v1_perp
        p2_prime += np.outer(axis, axis.conj())
        weight = abs(np.vdot(b.v1, psi)) ** 2 + abs(np.vdot(b.v1_perp, psi)) ** 2
        contrib = (s * s if keep_v1 else c * c) * weight
        cap = 2.0 * s * s * c * c * weight
        identity_sum += s * s * c * c * weight
        distance_sq += contrib
        block_terms.append(
            {
                "theta": b.theta,
                "kept_axis": "v1" if keep_v1 else "v1_perp",
                "state_weight": weight,
                "distance_sq_term": contrib,
                "two_eps_sq_term": cap,
            }
        )
        if debug:
            assert contrib <= cap + tol, (contrib, cap)

    identity_residual = abs(epsilon**2 - identity_sum)
    if identity_residual > max(tol, 1e-8):
        raise ConvergenceFailure(
            f"commutation-defect accounting off by {identity_residual:.3e}"
        )
    on_state_distance = vector_norm(p2_prime @ psi - p2 @ psi)
    if debug:
        assert abs(on_state_distance**2 - distance_sq) <= max(tol, 1e-8)
    commutator_norm = frobenius_norm(p1 @ p2_prime - p2_prime @ p1)
    result = RepairResult(
        p2_prime=as_matrix((p2_prime + p2_prime.conj().T) / 2.0),
        epsilon=epsilon,
        on_state_distance=on_state_distance,
        commutator_norm=commutator_norm,
        decomposition=dec,
        identity_residual=identity_residual,
        block_terms=block_terms,
    )
    if result.bound_margin < -tol:
        raise ConvergenceFailure(
            f"repair distance {on_state_distance:.6g} exceeds "
            f"sqrt(2) * epsilon = {math.sqrt(2.0) * epsilon:.6g}"
        )
    return result
