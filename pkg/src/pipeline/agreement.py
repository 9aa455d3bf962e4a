"""
Keyword list agreement between independent annotators.
"""
from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Iterable, Sequence

from ..core.errors import EmptyInputError, InvalidParameterError
from ..model.classify import normalize_tag

DEFINITION_NOTE = (
    "agreement is |intersection| / |union|; merged_over_intersected is the literal "
    "|union| / |intersection| ratio, which is >= 1 and infinite for disjoint lists"
)


@dataclass(frozen=True)
class AgreementResult:
    merged: FrozenSet[str]
    intersected: FrozenSet[str]
    agreement: float
    merged_over_intersected: float

    def to_dict(self) -> Dict[str, Any]:
        ratio = self.merged_over_intersected
        return {
            "merged": sorted(self.merged),
            "intersected": sorted(self.intersected),
            "agreement": self.agreement,
            "merged_over_intersected": "inf" if ratio == float("inf") else ratio,
            "note": DEFINITION_NOTE,
        }


def annotation_agreement(lists: Sequence[Iterable[str]]) -> AgreementResult:
    """
    Overlap of two or more keyword lists after tag normalization.

    Args:
        lists: Keyword lists, one per annotator

    Returns:
        AgreementResult: Union, intersection and their size ratios

    Raises:
        InvalidParameterError: With fewer than two lists
        EmptyInputError: If a list is empty after normalization
    """
    if len(lists) < 2:
        raise InvalidParameterError(
            f"Agreement needs at least 2 keyword lists, got {len(lists)}", "agree", {"lists": len(lists)}
        )
    sets = []
    for position, items in enumerate(lists):
        normalized = frozenset(t for t in (normalize_tag(item) for item in items) if t)
        if not normalized:
            raise EmptyInputError(f"Keyword list {position} is empty", "agree", {"list": position})
        sets.append(normalized)

    merged = frozenset().union(*sets)
    intersected = frozenset.intersection(*sets)
    return AgreementResult(
        merged=merged,
        intersected=intersected,
        agreement=len(intersected) / len(merged),
        merged_over_intersected=len(merged) / len(intersected) if intersected else float("inf"),
    )
