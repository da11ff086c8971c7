"""Particle-hole excitation pools."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable

from adspqe.errors import ConfigurationError, ConsistencyError
from adspqe.hamiltonian import ReferenceData
from adspqe.state import Excitation

POOL_RANKS = {"s": 1, "sd": 2, "sdt": 3, "sdtq": 4}


@dataclass(frozen=True)
class OperatorPool:
    entries: tuple[Excitation, ...]
    rank_cap: int
    index: dict[Excitation, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "index", {e: i for i, e in enumerate(self.entries)})
        if len(self.index) != len(self.entries):
            raise ConsistencyError("duplicate excitation in pool")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __contains__(self, exc: object) -> bool:
        return exc in self.index

    def restricted(self, rank_cap: int) -> OperatorPool:
        """Sub-pool of entries with rank <= ``rank_cap`` (order preserved)."""
        return OperatorPool(tuple(e for e in self.entries if e.rank <= rank_cap), min(rank_cap, self.rank_cap))

    def to_json(self) -> str:
        return json.dumps({"rank_cap": self.rank_cap, "entries": [e.to_dict() for e in self.entries]})

    @classmethod
    def from_json(cls, text: str) -> OperatorPool:
        data = json.loads(text)
        return cls(tuple(Excitation.from_dict(d) for d in data["entries"]), data["rank_cap"])


def generate_pool(ref: ReferenceData, rank_cap: int) -> OperatorPool:
    """All Sz-conserving excitations of rank 1..``rank_cap`` out of ``ref``.

    Ordered by rank, then lexicographically by (holes, particles).
    """
    if not 1 <= rank_cap <= 4:
        raise ConfigurationError(f"rank_cap must be in [1, 4], got {rank_cap}")
    occ, virt = ref.occupied_spin_orbitals, ref.virtual_spin_orbitals
    entries = []
    for rank in range(1, rank_cap + 1):
        for holes in itertools.combinations(occ, rank):
            n_alpha = sum(1 for i in holes if i % 2 == 0)
            for particles in itertools.combinations(virt, rank):
                if sum(1 for a in particles if a % 2 == 0) == n_alpha:
                    entries.append(Excitation(holes, particles))
    return OperatorPool(tuple(entries), rank_cap)


def complement(pool: OperatorPool, selected: Iterable[Excitation]) -> list[Excitation]:
    """Pool entries not in ``selected``, in pool order."""
    chosen = set(selected)
    missing = [e for e in chosen if e not in pool]
    if missing:
        raise ConsistencyError(f"{len(missing)} selected excitation(s) not in pool, e.g. {missing[0]}")
    return [e for e in pool.entries if e not in chosen]
