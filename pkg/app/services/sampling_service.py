"""
Seeded random instances for the property suites.

Every generator takes a ``random.Random`` so that a suite run with a fixed
seed produces the same instances, and therefore the same report bytes.
"""

import random
import string
from itertools import combinations
from typing import List, Tuple

from app.models.groupoid_models import GroupoidModel, PartialBijection
from app.models.lattice_models import FiniteSpace, PointSet
from app.models.monoid_models import Element, MonoidPresentation, Relation, RelationKind
from app.services.groupoid_service import GroupoidService
from app.services.lattice_service import LatticeService

DecomposeCase = Tuple[FiniteSpace, List[PointSet], List[PointSet]]


class SamplingService:
    """
    Service class for random presentations, spaces and groupoid models
    """

    @staticmethod
    def _element(rng: random.Random, generators: Tuple[str, ...], max_coefficient: int) -> Element:
        return Element.of({g: rng.randint(0, max_coefficient) for g in generators})

    @staticmethod
    def random_presentation(
        rng: random.Random,
        max_generators: int = 4,
        max_relations: int = 4,
        max_coefficient: int = 3,
    ) -> MonoidPresentation:
        generators = tuple(string.ascii_lowercase[: rng.randint(1, max_generators)])
        relations = []
        for _ in range(rng.randint(0, max_relations)):
            lhs = SamplingService._element(rng, generators, max_coefficient)
            rhs = SamplingService._element(rng, generators, max_coefficient)
            kind = rng.choice([RelationKind.LEQ, RelationKind.EQ])
            relations.append(Relation(lhs=lhs, rhs=rhs, kind=kind))
        return MonoidPresentation(generators=generators, relations=tuple(relations))

    @staticmethod
    def points(n: int) -> Tuple[str, ...]:
        return tuple(f"x{i + 1}" for i in range(n))

    @staticmethod
    def random_partition_space(rng: random.Random, max_points: int = 6, max_blocks: int = 3) -> FiniteSpace:
        """Opens are the unions of the blocks of a random partition."""
        pts = SamplingService.points(rng.randint(1, max_points))
        blocks = min(len(pts), rng.randint(1, max_blocks))
        labels = [rng.randrange(blocks) for _ in pts]
        for b in range(blocks):
            labels[b] = b
        basis = [[x for x, label in zip(pts, labels) if label == b] for b in range(blocks)]
        return FiniteSpace.generated_by(pts, basis)

    @staticmethod
    def random_space(rng: random.Random, max_points: int = 6, max_opens: int = 8) -> FiniteSpace:
        """The lattice generated by random subsets, redrawn until it has at most ``max_opens`` members."""
        pts = SamplingService.points(rng.randint(1, max_points))
        while True:
            basis = [[x for x in pts if rng.random() < 0.5] for _ in range(rng.randint(1, 3))]
            space = FiniteSpace.generated_by(pts, basis)
            if len(space.opens) <= max_opens:
                return space

    @staticmethod
    def random_decompose_case(rng: random.Random, space: FiniteSpace, max_rows: int = 3) -> DecomposeCase:
        """
        V_j drawn from the opens; K_i are unions of atoms of the generated
        algebra, each atom joining at most as many K_i as V_j cover it.
        On a partition space the K_i are then open.
        """
        nonempty = [u for u in space.opens if u] or [()]
        vs = [rng.choice(nonempty) for _ in range(rng.randint(1, max_rows))]
        n = rng.randint(1, max_rows)
        ks: List[List[str]] = [[] for _ in range(n)]
        for atom in LatticeService.atoms(space):
            witness = next(iter(atom))
            capacity = sum(1 for v in vs if witness in v)
            for i in rng.sample(range(n), min(n, rng.randint(0, capacity))):
                ks[i].extend(sorted(atom))
        return space, [tuple(sorted(k)) for k in ks], vs

    @staticmethod
    def random_partial_bijection(rng: random.Random, pts: Tuple[str, ...]) -> PartialBijection:
        size = rng.randint(1, len(pts))
        domain = rng.sample(pts, size)
        image = rng.sample(pts, size)
        return PartialBijection(pairs=tuple(zip(domain, image)))

    @staticmethod
    def random_groupoid_model(
        rng: random.Random, max_points: int = 4, max_generators: int = 3
    ) -> GroupoidModel:
        pts = SamplingService.points(rng.randint(1, max_points))
        generators = [SamplingService.random_partial_bijection(rng, pts) for _ in range(rng.randint(1, max_generators))]
        return GroupoidService.close_inverse_semigroup(pts, generators)

    @staticmethod
    def open_indicators(model: GroupoidModel) -> List[Element]:
        """1_U for every nonempty open U, as point-count functions."""
        return [Element.of({x: 1 for x in u}) for u in model.nonempty_opens()]

    @staticmethod
    def pairs(items: List[Element]) -> List[Tuple[Element, Element]]:
        return [(a, b) for a, b in combinations(items, 2)] + [(b, a) for a, b in combinations(items, 2)]
