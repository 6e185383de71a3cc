"""Source-group composition: abundance versus physical-area shares.

Instances aggregate into the three functional origin groups (Domestic,
Fishing, Fragments). Reporting both the count share and the area share per
group exposes categories whose footprint is disproportionate to their
abundance; the overrepresentation quotient makes that explicit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import SourceSinkError
from .ingest import SourceGroup, Taxonomy

# (instance id, gcode, area in m²)
CompositionItem = tuple[int, str, float]


@dataclass(frozen=True)
class GroupComposition:
    group: SourceGroup
    count: int
    count_share: float
    total_area_m2: float
    area_share: float
    mean_item_area_m2: float  # 0.0 for empty groups


def compose(items: Iterable[CompositionItem], taxonomy: Taxonomy) -> list[GroupComposition]:
    """Aggregate a survey into exactly three group rows (zero groups included).

    Output order is Domestic, Fishing, Fragments. Count and area shares each
    sum to 1 over the groups; instance order does not matter (sums run in
    ascending instance-id order).
    """
    ordered = sorted(items, key=lambda it: it[0])
    if not ordered:
        raise SourceSinkError("composition undefined for an empty survey")
    counts = {group: 0 for group in SourceGroup}
    areas = {group: 0.0 for group in SourceGroup}
    for _, gcode, area in ordered:
        group = taxonomy.group(gcode)
        counts[group] += 1
        areas[group] += area
    total_count = sum(counts.values())
    total_area = sum(areas[g] for g in SourceGroup)
    if not total_area > 0:
        raise SourceSinkError("total survey area is zero; area shares undefined")
    return [
        GroupComposition(
            group=group,
            count=counts[group],
            count_share=counts[group] / total_count,
            total_area_m2=areas[group],
            area_share=areas[group] / total_area,
            mean_item_area_m2=areas[group] / counts[group] if counts[group] else 0.0,
        )
        for group in SourceGroup
    ]


def overrepresentation(composition: GroupComposition) -> float:
    """How much larger a group's area share is than its count share."""
    if not composition.count_share > 0:
        raise SourceSinkError(
            f"overrepresentation undefined for {composition.group.value}: zero count share"
        )
    return composition.area_share / composition.count_share


def mean_area_ratio(group: GroupComposition, baseline: GroupComposition) -> float:
    """Per-item mean area of one group relative to another."""
    if not baseline.mean_item_area_m2 > 0:
        raise SourceSinkError(
            f"mean-area ratio undefined: {baseline.group.value} has zero mean item area"
        )
    return group.mean_item_area_m2 / baseline.mean_item_area_m2
