"""Inter-annotator agreement (Krippendorff's alpha, nominal metric).

The reliability matrix is items x raters with ``None`` for missing
cells; only units carrying at least two ratings contribute.  Alpha is
computed as 1 - D_o/D_e from the coincidence matrix over pairable
values, which handles missing data and any number of raters.
"""

from __future__ import annotations

from collections import Counter
from typing import Hashable, Sequence

from .core import AnnotationRecord

Cell = Hashable | None


def krippendorff_alpha(
    matrix: Sequence[Sequence[Cell]], metric: str = "nominal"
) -> float:
    """Return alpha for a reliability matrix (rows = items, cols = raters).

    Raises ``ValueError`` when no unit has two ratings (nothing is
    pairable) or for an unsupported metric.  Degenerate data where every
    pairable value is identical has zero expected disagreement and is
    returned as perfect agreement, 1.0.
    """
    if metric != "nominal":
        raise ValueError(f"unsupported metric: {metric!r} (only 'nominal')")

    # Coincidence counts: each ordered pair of values inside a unit with
    # m ratings contributes 1/(m-1), so every unit has total weight m.
    observed_match = 0.0
    totals: Counter = Counter()
    n = 0.0
    for row in matrix:
        present = [v for v in row if v is not None]
        m = len(present)
        if m < 2:
            continue
        counts = Counter(present)
        n += m
        for value, count in counts.items():
            totals[value] += count
            # Ordered same-value pairs: count*(count-1), weighted.
            observed_match += count * (count - 1) / (m - 1)

    if n == 0:
        raise ValueError("no pairable values: every item has fewer than 2 ratings")

    d_observed = 1.0 - observed_match / n
    expected_match = sum(c * (c - 1) for c in totals.values()) / (n * (n - 1))
    d_expected = 1.0 - expected_match
    if d_expected == 0.0:
        return 1.0
    return 1.0 - d_observed / d_expected


def reliability_matrix(
    records: Sequence[AnnotationRecord],
) -> tuple[list[list[Cell]], list[str], list[str]]:
    """Arrange records into (matrix, draft_ids, annotator_ids).

    Cells hold ``"yes"``/``"no"`` verdicts; drafts an annotator never saw
    stay ``None``.  Rows and columns are sorted by id so the layout is
    reproducible.  A duplicate (draft, annotator) pair raises.
    """
    draft_ids = sorted({r.draft_id for r in records})
    rater_ids = sorted({r.annotator_id for r in records})
    row_of = {d: i for i, d in enumerate(draft_ids)}
    col_of = {a: j for j, a in enumerate(rater_ids)}

    matrix: list[list[Cell]] = [
        [None] * len(rater_ids) for _ in draft_ids
    ]
    for rec in records:
        i, j = row_of[rec.draft_id], col_of[rec.annotator_id]
        if matrix[i][j] is not None:
            raise ValueError(
                f"duplicate rating by {rec.annotator_id!r} on {rec.draft_id!r}"
            )
        matrix[i][j] = "yes" if rec.is_correct else "no"
    return matrix, draft_ids, rater_ids
