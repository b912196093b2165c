import numpy as np
import pytest

import qjoint as q
from qjoint.linalg import (
    haar_unitary,
    pure_density,
    random_density_matrix,
    random_state_vector,
)


@pytest.fixture(scope="session")
def appendix():
    return q.load_appendix_instance()


@pytest.fixture(scope="session")
def appendix_family(appendix):
    return q.induced_family(appendix)


@pytest.fixture(scope="session")
def appendix_states(appendix):
    return q.induced_state_family(appendix)


def make_commuting_family(rng, dim=4, n=3, n_states=2, mixed=False):
    """Binary projective family, all projectors diagonal in one random basis.

    Global commutation makes every distribution property hold for arbitrary
    states, so the states need not share the basis.
    """
    u = haar_unitary(dim, rng)
    projs = []
    for _ in range(n):
        d = np.zeros(dim)
        d[rng.permutation(dim)[: int(rng.integers(1, dim))]] = 1.0
        projs.append(u @ np.diag(d) @ u.conj().T)
    fam = q.MeasurementFamily.binary_projective(projs, tol=1e-9)
    if mixed:
        states = [random_density_matrix(dim, rng) for _ in range(n_states)]
    else:
        states = [pure_density(random_state_vector(dim, rng)) for _ in range(n_states)]
    return fam, q.StateFamily(states)


def make_commuting_pvm_family(rng, dim=6, n=2, outcomes=3, n_states=2):
    """Commuting multi-outcome projective measurements in a shared eigenbasis."""
    u = haar_unitary(dim, rng)
    povms = []
    for _ in range(n):
        labels = rng.integers(0, outcomes, size=dim)
        while len(set(labels.tolist())) < outcomes:
            labels = rng.integers(0, outcomes, size=dim)
        elements = []
        for x in range(outcomes):
            d = (labels == x).astype(float)
            elements.append(u @ np.diag(d) @ u.conj().T)
        povms.append(q.Povm.from_elements(elements))
    fam = q.MeasurementFamily.from_povms(povms)
    states = [random_density_matrix(dim, rng) for _ in range(n_states)]
    return fam, q.StateFamily(states)


def make_noncommuting_family(rng, dim=4, n=2, n_states=1):
    """Generic random projectors; with overwhelming probability nothing commutes."""
    from qjoint.linalg import random_projector

    projs = [
        random_projector(dim, int(rng.integers(1, dim)), rng) for _ in range(n)
    ]
    fam = q.MeasurementFamily.binary_projective(projs, tol=1e-9)
    states = [pure_density(random_state_vector(dim, rng)) for _ in range(n_states)]
    return fam, q.StateFamily(states)


def make_coin_family(dim=2, n=1):
    """Trivial unsharp POVM {I/2, I/2} per measurement: permutable, no joint
    distribution."""
    coin = [np.eye(dim, dtype=complex) / 2.0, np.eye(dim, dtype=complex) / 2.0]
    povms = [q.Povm.from_elements([m.copy() for m in coin]) for _ in range(n)]
    fam = q.MeasurementFamily.from_povms(povms)
    states = [np.diag([1.0] + [0.0] * (dim - 1)).astype(complex)]
    return fam, q.StateFamily(states)
