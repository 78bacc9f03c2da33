"""Ranked result lists shared by the index, retrieval and evaluation layers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable


@dataclass(frozen=True)
class RankedEntry:
    unit_id: str
    score: float
    rank: int


@dataclass(frozen=True)
class RankedList:
    entries: tuple[RankedEntry, ...]

    @classmethod
    def from_scored(cls, scored: Iterable[tuple[str, float]]) -> "RankedList":
        """Order by score descending, unit id ascending, and assign 1-based ranks."""
        ordered = sorted(scored, key=lambda pair: (-pair[1], pair[0]))
        return cls(
            entries=tuple(
                RankedEntry(unit_id=uid, score=score, rank=i)
                for i, (uid, score) in enumerate(ordered, start=1)
            )
        )

    def truncate(self, k: int) -> "RankedList":
        return RankedList(entries=self.entries[:k])

    def unit_ids(self) -> list[str]:
        return [e.unit_id for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)
