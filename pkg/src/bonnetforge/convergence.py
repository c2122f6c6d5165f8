"""Refinement studies: observed convergence order from errors on nested grids."""
import numpy as np

#: errors below this are roundoff; a study that stays under it is exact
EXACT_FLOOR = 1e-12


def observed_order(hs, errors):
    """Least-squares slope of log(error) against log(h)."""
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if len(hs) < 2:
        raise ValueError("need at least two refinement levels")
    if np.any(errors <= 0):
        return float("inf")
    slope, _ = np.polyfit(np.log(hs), np.log(errors), 1)
    return float(slope)


def converges(hs, errors, min_order=1.9, floor=EXACT_FLOOR):
    """True if the errors shrink at ``min_order`` or better, or are all roundoff."""
    errors = np.asarray(errors, dtype=float)
    if np.all(errors <= floor):
        return True
    return observed_order(hs, errors) >= min_order


def study(grid, levels, measure):
    """Run ``measure(grid) -> dict of errors`` on ``grid`` and ``levels`` refinements.

    Returns ``{"h": [...], "errors": {name: [...]}, "order": {name: p}}``.
    """
    hs, rows = [], []
    g = grid
    for _ in range(levels + 1):
        hs.append(g.h)
        rows.append(measure(g))
        g = g.refine()
    names = list(rows[0])
    errors = {k: [float(r[k]) for r in rows] for k in names}
    order = {}
    for k, e in errors.items():
        order[k] = None if np.all(np.asarray(e) <= EXACT_FLOOR) else observed_order(hs, e)
    return {"h": hs, "errors": errors, "order": order}
