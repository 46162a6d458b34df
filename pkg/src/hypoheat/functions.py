"""Named test functions used by the estimators and the command line.

A function is stored once as a polynomial in Heisenberg-style chart
coordinates (x, y, z). On SU(2) and SL(2) it is pulled back through the
realization's chart, i.e. it becomes a polynomial in matrix entries, so the
frame derivatives X_i f = d/ds f(g exp(s e_i)) are exact: the gradient of the
entry polynomial dotted with the coordinate velocity of g e_i.

Entry functions (q0..q3, g00..g11) are registered directly in the stored
coordinates of the group they belong to.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .groups import Realization, SL2Realization, SU2Realization
from .polycalc import HeisPoly, SparsePoly, x, y, z


@dataclass(frozen=True)
class TestFunction:
    """A polynomial test function; ``chart_poly`` is in (x, y, z)."""

    __test__ = False  # not a pytest class

    name: str
    chart_poly: Optional[HeisPoly] = None
    entry_poly: Optional[Callable[[Realization], SparsePoly]] = None
    groups: tuple = ("heisenberg", "su2", "sl2")

    def on(self, group: Realization) -> SparsePoly:
        """Polynomial in the stored coordinates of ``group``."""
        if group.name not in self.groups:
            raise ValueError(f"test function {self.name!r} is not defined on {group.name}")
        if self.entry_poly is not None:
            return self.entry_poly(group)
        if group.name == "heisenberg":
            return self.chart_poly
        return self.chart_poly.compose(group.chart())

    def heis_poly(self) -> HeisPoly:
        if self.chart_poly is None:
            raise ValueError(f"{self.name!r} has no Heisenberg polynomial")
        return self.chart_poly

    def value(self, group: Realization, points: np.ndarray) -> np.ndarray:
        return self.on(group).evaluate(points)

    def frame_grad(self, group: Realization, points: np.ndarray) -> np.ndarray:
        """(n, 3) frame coefficients (Xf, Yf, Zf) of df at each point."""
        p = self.on(group)
        grads = np.stack([p.diff(c).evaluate(points) for c in range(group.ncoords)], axis=1)
        vel = group.frame_velocity(points)
        return np.einsum("nic,nc->ni", vel, grads)

    def is_constant(self) -> bool:
        poly = self.chart_poly if self.chart_poly is not None else None
        return poly is not None and poly.degree() <= 0


def _entry(index: int):
    def build(group: Realization) -> SparsePoly:
        return group.coordinate_polys()[index]
    return build


def _registry() -> dict:
    one = HeisPoly({(0, 0, 0): 1})
    table = {
        "one": one,
        "x": x,
        "y": y,
        "z": z,
        "xz": x * z,
        "x2+y2": x * x + y * y,
        "1+x2/10": one + x * x * Fraction(1, 10),
    }
    out = {name: TestFunction(name, poly) for name, poly in table.items()}
    for i, coord in enumerate(SU2Realization.coord_names):
        out[coord] = TestFunction(coord, entry_poly=_entry(i), groups=("su2",))
    for i, coord in enumerate(SL2Realization.coord_names):
        out[coord] = TestFunction(coord, entry_poly=_entry(i), groups=("sl2",))
    return out


REGISTRY = _registry()


def get_function(name: str) -> TestFunction:
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown test function {name!r}; known: {sorted(REGISTRY)}") from None


def function_names() -> list:
    return sorted(REGISTRY)
