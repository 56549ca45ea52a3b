"""Dimension of definable sets, via cell decomposition and a growth oracle."""

from __future__ import annotations

import math
from typing import Sequence

from .cells import decompose
from .oracle import count_box
from .syntax import Formula


def dimension(X: Formula, variables: Sequence[str]) -> int | None:
    """Max over a cell decomposition of the type-vector sums; None if empty."""
    dec = decompose(X, variables)
    if not dec.cells:
        return None
    return max(c.type_sum for c in dec.cells)


def growth_dimension_estimate(X: Formula, variables: Sequence[str], radii: Sequence[int]) -> int | None:
    """Fit |X cap [-N,N]^m| ~ N^d on the given radii; independent of the
    symbolic path.  None for an empty set (count 0 at the largest radius)."""
    radii = list(radii)
    if len(radii) < 3 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing, length >= 3")
    counts = [count_box(X, variables, r) for r in radii]
    if counts[-1] == 0:
        return None
    pts = [(math.log(r), math.log(c)) for r, c in zip(radii, counts) if c > 0]
    if len(pts) < 2 or counts[0] == counts[-1]:
        return 0
    n = len(pts)
    mx = sum(p[0] for p in pts) / n
    my = sum(p[1] for p in pts) / n
    sxx = sum((p[0] - mx) ** 2 for p in pts)
    sxy = sum((p[0] - mx) * (p[1] - my) for p in pts)
    slope = sxy / sxx
    return max(0, min(len(variables), round(slope)))
