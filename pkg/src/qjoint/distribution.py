"""The joint-outcome functional W, orbit sets, and the four distribution properties.

``W(rho, x) = Tr(Q_[N]^x rho)`` where ``Q_[N]^x`` is the sequenced POVM element
over all measurements in ascending index order.  The four properties checked
here (marginals, disjointness, reducibility, sequential independence), plus
the functional axioms and the on-state projector condition, each produce a
:class:`PropertyReport` with the worst residual and canonical witnesses.

Quantifiers over post-measurement states use the orbit set: all normalized
states reachable from the state family by sequences of measurements over
subsets of a given index set, with zero-probability branches skipped and
near-duplicate states (trace distance below tolerance) merged.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CombinatorialLimitExceeded,
    DimensionMismatch,
    PrerequisiteFailed,
    ZeroProbabilityBranch,
)
from .linalg import (
    CHECK_TOL,
    MAX_BRANCHES,
    MAX_DIM,
    MAX_N,
    TAU_HERM,
    TAU_PROB,
    as_matrix,
    check_density_matrix,
    trace_distance,
    trace_inner,
)
from .measurement import MeasurementFamily, check_index_set, check_outcome_tuple
from .permutation import (
    WITNESS_CAP,
    _WorstTracker,
    is_fully_permutable,
)

__all__ = [
    "StateFamily",
    "JointDistributionTable",
    "OrbitSpec",
    "PropertyReport",
    "w_functional",
    "conditional_w",
    "orbit_states",
    "check_functional_axioms",
    "check_marginals",
    "check_disjointness",
    "check_reducibility",
    "check_on_state_projector",
    "check_sequential_independence",
    "theorem1_check",
    "build_joint_distribution",
    "theorem2_verdict",
    "run_property_checks",
    "PROPERTY_NAMES",
]

PROPERTY_NAMES = (
    "functional_axioms",
    "marginals",
    "disjointness",
    "reducibility",
    "sequential_independence",
    "on_state_projector",
)


@dataclass
class StateFamily:
    """A finite set of density operators on a common space (the family F)."""

    states: list[np.ndarray]
    tol: float = TAU_HERM

    def __post_init__(self) -> None:
        if not self.states:
            raise ValueError("state family must be non-empty")
        self.states = [check_density_matrix(s, self.tol) for s in self.states]
        dims = {s.shape[0] for s in self.states}
        if len(dims) != 1:
            raise DimensionMismatch(f"states of mixed dimension: {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]


@dataclass
class OrbitSpec:
    """Which measurement indices may act, and a cap on partition block count."""

    u: tuple[int, ...]
    max_partition_blocks: int | None = None


@dataclass
class PropertyReport:
    """Outcome of one property check: worst residual, witnesses, verdict."""

    property_name: str
    worst_residual: float
    witnesses: list[dict]
    passed: bool
    tol: float
    details: dict = field(default_factory=dict)


@dataclass
class JointDistributionTable:
    """The realized W for one state: outcome tuple -> probability."""

    family: MeasurementFamily
    state: np.ndarray
    probabilities: dict[tuple[int, ...], float]

    def total(self) -> float:
        return float(sum(self.probabilities.values()))


class _FamilyCache:
    """Memoized sequenced roots/elements for one measurement family."""

    def __init__(self, family: MeasurementFamily):
        self.family = family
        self._roots: dict = {}
        self._qs: dict = {}

    def root(self, s: tuple[int, ...], y: tuple[int, ...]) -> np.ndarray:
        key = (s, y)
        if key not in self._roots:
            out = np.eye(self.family.dim, dtype=complex)
            for i, x in zip(s, y):
                out = out @ self.family.povm(i).root(x)
            self._roots[key] = out
        return self._roots[key]

    def q(self, s: tuple[int, ...], y: tuple[int, ...]) -> np.ndarray:
        key = (s, y)
        if key not in self._qs:
            r = self.root(s, y)
            q = r.conj().T @ r
            self._qs[key] = (q + q.conj().T) / 2.0
        return self._qs[key]

    def full_q(self, x: tuple[int, ...]) -> np.ndarray:
        return self.q(self.family.indices, x)


def w_functional(
    family: MeasurementFamily,
    rho: np.ndarray,
    x_full: tuple[int, ...],
    _cache: _FamilyCache | None = None,
) -> float:
    """Tr(Q_[N]^x rho) for the full ascending measurement sequence."""
    rho = as_matrix(rho)
    if rho.shape != (family.dim, family.dim):
        raise DimensionMismatch(
            f"state shape {rho.shape} against family dimension {family.dim}"
        )
    x_full = check_outcome_tuple(family, family.indices, x_full)
    cache = _cache or _FamilyCache(family)
    return trace_inner(cache.full_q(x_full), rho)


def conditional_w(
    family: MeasurementFamily,
    rho: np.ndarray,
    x_full: tuple[int, ...],
    s: tuple[int, ...],
    y: tuple[int, ...],
    prob_tol: float = TAU_PROB,
) -> float:
    """W conditioned on having observed ``y`` for the index set ``s`` first."""
    s = check_index_set(s, family.n)
    y = check_outcome_tuple(family, s, y)
    cache = _FamilyCache(family)
    r = cache.root(s, y)
    evolved = r @ as_matrix(rho) @ r.conj().T
    p = float(np.trace(evolved).real)
    if p <= prob_tol:
        raise ZeroProbabilityBranch(
            f"conditioning probability {p:.3e} at or below {prob_tol:.3e}"
        )
    return w_functional(family, evolved / p, x_full, _cache=cache)


def _unordered_partitions(items: tuple[int, ...]):
    """All unordered set partitions, blocks as ascending tuples sorted by minimum."""
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for sub in _unordered_partitions(rest):
        yield ((first,),) + sub
        for k in range(len(sub)):
            grown = tuple(sorted((first,) + sub[k]))
            yield sub[:k] + (grown,) + sub[k + 1 :]


def _canonical_partitions(items: tuple[int, ...], max_blocks: int | None = None):
    """Unordered partitions in a canonical, deterministic order."""
    seen = set()
    out = []
    for p in _unordered_partitions(items):
        blocks = tuple(sorted(p, key=lambda b: b[0]))
        if blocks in seen:
            continue
        seen.add(blocks)
        if max_blocks is None or len(blocks) <= max_blocks:
            out.append(blocks)
    out.sort(key=lambda blocks: (len(blocks), blocks))
    return out


def _ordered_partitions(items: tuple[int, ...], max_blocks: int | None = None):
    """Every ordered partition: canonical unordered partitions, then block orderings."""
    for blocks in _canonical_partitions(items, max_blocks):
        for order in itertools.permutations(range(len(blocks))):
            yield tuple(blocks[k] for k in order)


def orbit_states(
    family: MeasurementFamily,
    spec: OrbitSpec | tuple[int, ...],
    f: StateFamily,
    prob_tol: float = TAU_PROB,
    dedup_tol: float = CHECK_TOL,
    max_branches: int = MAX_BRANCHES,
) -> list[np.ndarray]:
    """All normalized post-measurement states reachable over subsets of ``spec.u``.

    Enumerates every subset T of u, every ordered partition of T, and every
    outcome assignment; skips branches whose probability falls to ``prob_tol``
    or below; deduplicates states closer than ``dedup_tol`` in trace distance.
    The empty subset contributes the family itself.
    """
    if not isinstance(spec, OrbitSpec):
        spec = OrbitSpec(u=tuple(spec))
    u = check_index_set(spec.u, family.n)
    if family.dim > MAX_DIM:
        raise CombinatorialLimitExceeded(f"dimension {family.dim} exceeds cap {MAX_DIM}")
    cache = _FamilyCache(family)
    kept: list[np.ndarray] = []
    kept_stack: np.ndarray | None = None

    def keep(rho: np.ndarray) -> None:
        nonlocal kept_stack
        if kept:
            diffs = np.linalg.norm(kept_stack - rho[None, :, :], axis=(1, 2))
            near = np.nonzero(diffs / 2.0 < dedup_tol * np.sqrt(family.dim))[0]
            for k in near:
                if trace_distance(kept[k], rho) < dedup_tol:
                    return
        kept.append(rho)
        kept_stack = np.stack(kept)

    branches = 0
    for psi in f.states:
        keep((psi + psi.conj().T) / 2.0)
    for size in range(1, len(u) + 1):
        for t_set in itertools.combinations(u, size):
            for blocks in _ordered_partitions(t_set, spec.max_partition_blocks):
                outcome_spaces = [list(family.outcome_tuples(b)) for b in blocks]
                for ys in itertools.product(*outcome_spaces):
                    for psi in f.states:
                        branches += 1
                        if branches > max_branches:
                            raise CombinatorialLimitExceeded(
                                f"orbit enumeration exceeded {max_branches} branches"
                            )
                        rho = psi
                        dead = False
                        for b, y in zip(blocks, ys):
                            r = cache.root(b, y)
                            rho = r @ rho @ r.conj().T
                            if float(np.trace(rho).real) <= prob_tol:
                                dead = True
                                break
                        if dead:
                            continue
                        rho = rho / float(np.trace(rho).real)
                        keep((rho + rho.conj().T) / 2.0)
    return kept


def _subsets(indices: tuple[int, ...], include_full: bool = True):
    top = len(indices) if include_full else len(indices) - 1
    for size in range(0, top + 1):
        yield from itertools.combinations(indices, size)


def _restrict(x: tuple[int, ...], full: tuple[int, ...], s: tuple[int, ...]) -> tuple[int, ...]:
    pos = {i: k for k, i in enumerate(full)}
    return tuple(x[pos[i]] for i in s)


def _report(name: str, tracker: _WorstTracker, tol: float, details: dict | None = None) -> PropertyReport:
    return PropertyReport(
        property_name=name,
        worst_residual=tracker.worst,
        witnesses=tracker.final_witnesses(),
        passed=tracker.worst <= tol,
        tol=tol,
        details={**(details or {}), "failure_count": tracker.failures},
    )


def _check_prereq(marginals_report: PropertyReport | None, dependent: str) -> None:
    if marginals_report is not None and not marginals_report.passed:
        raise PrerequisiteFailed(
            f"{dependent} invoked with a failed marginals report "
            f"(worst residual {marginals_report.worst_residual:.3e})"
        )


def check_functional_axioms(
    family: MeasurementFamily, f: StateFamily, tol: float = CHECK_TOL
) -> PropertyReport:
    """Normalization (operator level), linearity spot-checks, non-negativity."""
    cache = _FamilyCache(family)
    tracker = _WorstTracker(tol * family.dim)
    total = np.zeros((family.dim, family.dim), dtype=complex)
    outs = list(family.outcome_tuples(family.indices))
    for x in outs:
        total += cache.full_q(x)
    norm_res = float(np.abs(total - np.eye(family.dim)).max())
    tracker.add(norm_res, {"kind": "normalization"})
    lin_tracker = _WorstTracker(tol)
    for a in range(len(f.states)):
        b = (a + 1) % len(f.states)
        for lam in (0.25, 0.5, 0.75):
            mix = lam * f.states[a] + (1 - lam) * f.states[b]
            for x in outs:
                lhs = w_functional(family, mix, x, _cache=cache)
                rhs = lam * w_functional(family, f.states[a], x, _cache=cache) + (
                    1 - lam
                ) * w_functional(family, f.states[b], x, _cache=cache)
                lin_tracker.add(
                    abs(lhs - rhs), {"kind": "linearity", "states": [a, b], "lambda": lam}
                )
    neg_tracker = _WorstTracker(tol)
    for sid, psi in enumerate(f.states):
        for x in outs:
            v = w_functional(family, psi, x, _cache=cache)
            neg_tracker.add(max(0.0, -v), {"kind": "non_negativity", "state": sid, "x": list(x)})
    worst = max(tracker.worst, lin_tracker.worst, neg_tracker.worst)
    passed = (
        tracker.worst <= tol * family.dim
        and lin_tracker.worst <= tol
        and neg_tracker.worst <= tol
    )
    witnesses = tracker.final_witnesses() + lin_tracker.final_witnesses() + neg_tracker.final_witnesses()
    return PropertyReport(
        property_name="functional_axioms",
        worst_residual=worst,
        witnesses=witnesses[:WITNESS_CAP],
        passed=passed,
        tol=tol,
        details={"normalization_residual": norm_res},
    )


def check_marginals(
    family: MeasurementFamily,
    f: StateFamily,
    tol: float = CHECK_TOL,
    prob_tol: float = TAU_PROB,
    dedup_tol: float = CHECK_TOL,
    max_branches: int = MAX_BRANCHES,
) -> PropertyReport:
    """Summing W over the complement of S must reproduce Tr(Q_S^y rho).

    Quantified over all S and every state in the orbit over the full index
    set.  For singleton S the sequenced marginal operator is additionally
    compared entrywise against the original measurement element.
    """
    cache = _FamilyCache(family)
    full = family.indices
    orbit = orbit_states(family, full, f, prob_tol, dedup_tol, max_branches)
    tracker = _WorstTracker(tol)
    outs = list(family.outcome_tuples(full))
    op_worst = 0.0
    for i in full:
        for x in family.povm(i).outcomes:
            dev = float(np.abs(cache.q((i,), (x,)) - family.povm(i).element(x)).max())
            op_worst = max(op_worst, dev)
            tracker.add(
                dev if dev > family.dim * tol else 0.0,
                {"kind": "marginal_operator", "index": i, "outcome": x},
            )
    for rid, rho in enumerate(orbit):
        table = {x: trace_inner(cache.full_q(x), rho) for x in outs}
        for s in _subsets(full):
            for y in family.outcome_tuples(s):
                lhs = sum(table[x] for x in outs if _restrict(x, full, s) == y)
                rhs = trace_inner(cache.q(s, y), rho)
                tracker.add(
                    abs(lhs - rhs),
                    {"kind": "marginal_sum", "state": rid, "s": list(s), "y": list(y)},
                )
    return _report(
        "marginals",
        tracker,
        tol,
        {"orbit_size": len(orbit), "operator_residual": op_worst},
    )


def check_disjointness(
    family: MeasurementFamily,
    f: StateFamily,
    tol: float = CHECK_TOL,
    prob_tol: float = TAU_PROB,
    dedup_tol: float = CHECK_TOL,
    max_branches: int = MAX_BRANCHES,
    marginals_report: PropertyReport | None = None,
) -> PropertyReport:
    """Conditioning on a wrong outcome tuple must annihilate: Tr(Q_[N]^x R_S^y rho R_S^y†) = 0.

    Quantified over S, states in the orbit over the complement of S, and all
    mismatched pairs (x, y).
    """
    _check_prereq(marginals_report, "disjointness")
    cache = _FamilyCache(family)
    full = family.indices
    tracker = _WorstTracker(tol)
    outs = list(family.outcome_tuples(full))
    for s in _subsets(full):
        if not s:
            continue
        rest = tuple(i for i in full if i not in s)
        orbit = orbit_states(family, rest, f, prob_tol, dedup_tol, max_branches)
        for y in family.outcome_tuples(s):
            r = cache.root(s, y)
            for x in outs:
                if _restrict(x, full, s) == y:
                    continue
                m = r.conj().T @ cache.full_q(x) @ r
                for rid, rho in enumerate(orbit):
                    val = abs(trace_inner(m, rho))
                    tracker.add(
                        val,
                        {"kind": "disjointness", "state": rid, "s": list(s), "y": list(y), "x": list(x)},
                    )
    return _report("disjointness", tracker, tol)


def check_reducibility(
    family: MeasurementFamily,
    f: StateFamily,
    tol: float = CHECK_TOL,
    prob_tol: float = TAU_PROB,
    dedup_tol: float = CHECK_TOL,
    max_branches: int = MAX_BRANCHES,
    marginals_report: PropertyReport | None = None,
) -> PropertyReport:
    """Conditioning on the matching outcomes must not disturb: Tr(Q^x R_S^{x_S} rho R†) = Tr(Q^x rho).

    Quantified over proper subsets S and the orbit over the complement of S.
    """
    _check_prereq(marginals_report, "reducibility")
    cache = _FamilyCache(family)
    full = family.indices
    tracker = _WorstTracker(tol)
    outs = list(family.outcome_tuples(full))
    for s in _subsets(full, include_full=False):
        rest = tuple(i for i in full if i not in s)
        orbit = orbit_states(family, rest, f, prob_tol, dedup_tol, max_branches)
        conj_cache: dict = {}
        for x in outs:
            xs = _restrict(x, full, s)
            if (s, xs, x) not in conj_cache:
                r = cache.root(s, xs)
                conj_cache[(s, xs, x)] = r.conj().T @ cache.full_q(x) @ r
            m = conj_cache[(s, xs, x)]
            q = cache.full_q(x)
            for rid, rho in enumerate(orbit):
                val = abs(trace_inner(m, rho) - trace_inner(q, rho))
                tracker.add(
                    val,
                    {"kind": "reducibility", "state": rid, "s": list(s), "x": list(x)},
                )
    return _report("reducibility", tracker, tol)


def check_on_state_projector(
    family: MeasurementFamily, f: StateFamily, tol: float = CHECK_TOL
) -> PropertyReport:
    """Tr(R_S^y† Q_[N]^x R_S^y psi) = delta_{y, x_S} Tr(Q_[N]^x psi) for psi in F."""
    cache = _FamilyCache(family)
    full = family.indices
    tracker = _WorstTracker(tol)
    outs = list(family.outcome_tuples(full))
    for s in _subsets(full):
        for y in family.outcome_tuples(s):
            r = cache.root(s, y)
            for x in outs:
                m = r.conj().T @ cache.full_q(x) @ r
                match = _restrict(x, full, s) == y
                q = cache.full_q(x)
                for sid, psi in enumerate(f.states):
                    lhs = trace_inner(m, psi)
                    rhs = trace_inner(q, psi) if match else 0.0
                    tracker.add(
                        abs(lhs - rhs),
                        {"kind": "on_state_projector", "state": sid, "s": list(s), "y": list(y), "x": list(x)},
                    )
    return _report("on_state_projector", tracker, tol)


def check_sequential_independence(
    family: MeasurementFamily,
    f: StateFamily,
    tol: float = CHECK_TOL,
    max_branches: int = MAX_BRANCHES,
    marginals_report: PropertyReport | None = None,
) -> PropertyReport:
    """Block-sequenced probabilities must not depend on the block ordering.

    For every state in F, every subset T, every partition of T into blocks and
    every permutation of the blocks, the two nested-trace expressions (raw
    sequence probabilities, no renormalization) must agree within tolerance.
    """
    _check_prereq(marginals_report, "sequential_independence")
    cache = _FamilyCache(family)
    full = family.indices
    tracker = _WorstTracker(tol)
    branches = 0

    def sequenced_value(blocks, ys, psi) -> float:
        cur = psi
        for b, y in zip(blocks[:-1], ys[:-1]):
            r = cache.root(b, y)
            cur = r @ cur @ r.conj().T
        return trace_inner(cache.q(blocks[-1], ys[-1]), cur)

    for sid, psi in enumerate(f.states):
        for size in range(1, family.n + 1):
            for t_set in itertools.combinations(full, size):
                for blocks in _canonical_partitions(t_set):
                    s_count = len(blocks)
                    sigmas = list(itertools.permutations(range(s_count)))
                    for x_t in family.outcome_tuples(t_set):
                        xmap = dict(zip(t_set, x_t))
                        ys = tuple(tuple(xmap[i] for i in b) for b in blocks)
                        branches += len(sigmas)
                        if branches > max_branches:
                            raise CombinatorialLimitExceeded(
                                f"sequential independence enumeration exceeded {max_branches}"
                            )
                        values = {}
                        for order in sigmas:
                            pb = tuple(blocks[k] for k in order)
                            py = tuple(ys[k] for k in order)
                            values[order] = sequenced_value(pb, py, psi)
                        ident = values[tuple(range(s_count))]
                        for order in sigmas:
                            d = abs(ident - values[order])
                            tracker.add(
                                d,
                                {
                                    "kind": "sequential_independence",
                                    "state": sid,
                                    "t": list(t_set),
                                    "blocks": [list(b) for b in blocks],
                                    "sigma": [k + 1 for k in order],
                                    "x_t": list(x_t),
                                },
                            )
    return _report("sequential_independence", tracker, tol)


def theorem1_check(
    family: MeasurementFamily,
    f: StateFamily,
    tol: float = CHECK_TOL,
    prob_tol: float = TAU_PROB,
    dedup_tol: float = CHECK_TOL,
    max_branches: int = MAX_BRANCHES,
    precomputed: dict[str, PropertyReport] | None = None,
) -> PropertyReport:
    """Marginals + disjointness + reducibility must imply sequential independence.

    If the three premise checks pass but sequential independence fails, that
    contradicts a proven implication, so it is flagged as a library bug.  If a
    premise fails the implication is vacuous and recorded as not applicable.
    Reports already computed for this family/state pair can be supplied via
    ``precomputed`` to avoid repeating work.
    """
    pre = precomputed or {}
    marg = pre.get("marginals") or check_marginals(
        family, f, tol, prob_tol, dedup_tol, max_branches
    )
    disj = pre.get("disjointness") or check_disjointness(
        family, f, tol, prob_tol, dedup_tol, max_branches
    )
    red = pre.get("reducibility") or check_reducibility(
        family, f, tol, prob_tol, dedup_tol, max_branches
    )
    premises = {"marginals": marg, "disjointness": disj, "reducibility": red}
    details = {name: rep.passed for name, rep in premises.items()}
    if all(rep.passed for rep in premises.values()):
        seq = pre.get("sequential_independence") or check_sequential_independence(
            family, f, tol, max_branches
        )
        details["status"] = "applicable"
        details["contradiction"] = not seq.passed
        return PropertyReport(
            property_name="theorem1_implication",
            worst_residual=seq.worst_residual,
            witnesses=seq.witnesses,
            passed=seq.passed,
            tol=tol,
            details=details,
        )
    details["status"] = "not_applicable"
    details["contradiction"] = False
    failed = [name for name, rep in premises.items() if not rep.passed]
    witnesses = []
    for name in failed:
        witnesses.extend(premises[name].witnesses[: WITNESS_CAP // len(failed)])
    return PropertyReport(
        property_name="theorem1_implication",
        worst_residual=0.0,
        witnesses=witnesses,
        passed=True,
        tol=tol,
        details=details,
    )


def build_joint_distribution(
    family: MeasurementFamily, rho: np.ndarray, tol: float = CHECK_TOL
) -> JointDistributionTable:
    """The realized table W(rho, .) over all outcome tuples, clamped at zero."""
    cache = _FamilyCache(family)
    rho = as_matrix(rho)
    probabilities = {}
    for x in family.outcome_tuples(family.indices):
        probabilities[x] = max(0.0, w_functional(family, rho, x, _cache=cache))
    total = sum(probabilities.values())
    if abs(total - 1.0) > family.n * family.dim * tol:
        raise ValueError(f"joint distribution sums to {total}, not 1")
    return JointDistributionTable(family=family, state=rho, probabilities=probabilities)


def theorem2_verdict(
    family: MeasurementFamily,
    f: StateFamily,
    tol: float = CHECK_TOL,
    prob_tol: float = TAU_PROB,
    dedup_tol: float = CHECK_TOL,
    max_branches: int = MAX_BRANCHES,
    precomputed: dict[str, PropertyReport] | None = None,
) -> dict:
    """Both sides of the joint-distribution equivalence, evaluated numerically.

    Side A: all four distribution properties hold on F (plus the functional
    axioms).  Side B: the square roots are fully permutable on F and satisfy
    the on-state projector condition.  The two verdicts must agree.
    """
    required = PROPERTY_NAMES[1:]
    if precomputed is not None and all(name in precomputed for name in required):
        reports = precomputed
    else:
        reports = run_property_checks(
            family,
            f,
            tol=tol,
            prob_tol=prob_tol,
            dedup_tol=dedup_tol,
            max_branches=max_branches,
        )
    def3 = all(
        reports[name].passed
        for name in ("marginals", "disjointness", "reducibility", "sequential_independence")
    )
    perm = is_fully_permutable(family, f.states, tol)
    onstate = reports["on_state_projector"]
    side_b = perm.passed and onstate.passed
    return {
        "joint_distribution_exists": def3,
        "fully_permutable": perm.passed,
        "on_state_projectors": onstate.passed,
        "permutable_and_on_state_projectors": side_b,
        "equivalence_agrees": def3 == side_b,
        "reports": reports,
        "permutator_report": perm,
    }


def run_property_checks(
    family: MeasurementFamily,
    f: StateFamily,
    properties: tuple[str, ...] = PROPERTY_NAMES,
    tol: float = CHECK_TOL,
    prob_tol: float = TAU_PROB,
    dedup_tol: float = CHECK_TOL,
    max_branches: int = MAX_BRANCHES,
) -> dict[str, PropertyReport]:
    """Run the selected checks in dependency order, never raising on failures.

    Dependent checks still execute when marginals fails (their witnesses are
    the interesting output); the marginals verdict is recorded in each
    dependent report's details instead.
    """
    out: dict[str, PropertyReport] = {}
    marg: PropertyReport | None = None
    for name in PROPERTY_NAMES:
        if name not in properties:
            continue
        if name == "functional_axioms":
            out[name] = check_functional_axioms(family, f, tol)
        elif name == "marginals":
            marg = check_marginals(family, f, tol, prob_tol, dedup_tol, max_branches)
            out[name] = marg
        elif name == "disjointness":
            out[name] = check_disjointness(family, f, tol, prob_tol, dedup_tol, max_branches)
        elif name == "reducibility":
            out[name] = check_reducibility(family, f, tol, prob_tol, dedup_tol, max_branches)
        elif name == "sequential_independence":
            out[name] = check_sequential_independence(family, f, tol, max_branches)
        elif name == "on_state_projector":
            out[name] = check_on_state_projector(family, f, tol)
        if marg is not None and name in ("disjointness", "reducibility", "sequential_independence"):
            out[name].details["marginals_passed"] = marg.passed
    return out
