import random

import pytest

from app.services.lattice_service import LatticeService
from app.services.sampling_service import SamplingService


@pytest.mark.parametrize("seed", [0, 1, 7, 42])
def test_same_seed_same_instances(seed):
    first = SamplingService.random_presentation(random.Random(seed))
    second = SamplingService.random_presentation(random.Random(seed))
    assert first == second


@pytest.mark.parametrize("seed", range(20))
def test_partition_space_opens_are_unions_of_blocks(seed):
    space = SamplingService.random_partition_space(random.Random(seed))
    for u in space.open_sets():
        assert space.closure(u) == u


@pytest.mark.parametrize("seed", range(20))
def test_decompose_cases_respect_the_pointwise_premise(seed):
    rng = random.Random(seed)
    space = SamplingService.random_space(rng)
    space, ks, vs = SamplingService.random_decompose_case(rng, space)
    assert all(space.is_open(v) for v in vs)
    for x in space.points:
        assert sum(1 for k in ks if x in k) <= sum(1 for v in vs if x in v)
    atoms = LatticeService.atoms(space)
    for k in ks:
        assert all(atom <= set(k) or not atom & set(k) for atom in atoms)


@pytest.mark.parametrize("seed", range(10))
def test_groupoid_models_are_closed(seed):
    model = SamplingService.random_groupoid_model(random.Random(seed))
    members = set(model.bisections)
    for w in members:
        assert w.inverse() in members
    assert len(SamplingService.open_indicators(model)) == len(model.nonempty_opens())
