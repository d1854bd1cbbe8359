"""Big-M linearization of a binary-times-bounded product."""

from __future__ import annotations

from .lp import GE, LE, LinearProgram


def linearize_product(lp: LinearProgram, y: int, x: int, gamma: float,
                      name: str = "") -> tuple[int, list[int]]:
    """Add ``z = y * x`` for binary ``y`` and ``0 <= x <= gamma``.

    Emits ``z >= 0``, ``z <= gamma*y``, ``z <= x`` and ``z >= x - gamma*(1-y)``.
    Returns the new variable index and the indices of the four rows.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    yv, xv = lp.variables[y], lp.variables[x]
    if yv.lb < 0 or yv.ub > 1:
        raise ValueError(f"{yv.name or y} must be bounded in [0, 1]")
    if xv.lb < 0:
        raise ValueError(f"{xv.name or x} must be non-negative")
    if xv.ub > gamma:
        raise ValueError(f"gamma {gamma} is smaller than the upper bound {xv.ub} of "
                         f"{xv.name or x}")
    name = name or f"{yv.name}_{xv.name}"
    z = lp.add_variable(name, lb=-float("inf"))
    rows = [
        lp.add_constraint({z: 1}, GE, 0.0, f"{name}_nonneg"),
        lp.add_constraint({z: 1, y: -gamma}, LE, 0.0, f"{name}_off"),
        lp.add_constraint({z: 1, x: -1}, LE, 0.0, f"{name}_le_x"),
        lp.add_constraint({z: 1, x: -1, y: -gamma}, GE, -gamma, f"{name}_ge_x"),
    ]
    return z, rows
