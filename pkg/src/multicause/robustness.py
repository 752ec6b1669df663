"""One-by-one robustness sweep.

Causes enter the outcome regression cumulatively in a fixed order; the
table records each included cause's coefficient and significance at
every step. A sign flip is only reported when a cause is significant at
two consecutive steps with opposite signs, which is the instability the
sweep exists to surface.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import CauseMatrix, OutcomeVector
from .errors import ValidationError
from .effects import _surrogate_design, ols_fit
from .ppca import SurrogateConfounders


@dataclass
class SweepCell:
    coefficient: float
    p_value: float
    significant: bool


@dataclass
class SignFlip:
    cause: str
    step: int  # step t at which the flipped sign shows up (1-based)
    from_sign: int
    to_sign: int


@dataclass(eq=False)
class SweepTable:
    order: list[str]
    cells: list[dict[str, SweepCell]]  # cells[t-1]: cause -> cell at step t
    flips: list[SignFlip] = field(default_factory=list)
    mode: str = "noncausal"

    def cell(self, cause: str, step: int) -> SweepCell | None:
        return self.cells[step - 1].get(cause)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "order": list(self.order),
            "cells": [
                {
                    name: {
                        "coefficient": c.coefficient,
                        "p_value": c.p_value,
                        "significant": c.significant,
                    }
                    for name, c in step.items()
                }
                for step in self.cells
            ],
            "flips": [
                {
                    "cause": f.cause,
                    "step": f.step,
                    "from_sign": f.from_sign,
                    "to_sign": f.to_sign,
                }
                for f in self.flips
            ],
        }


def sweep(
    a: CauseMatrix,
    y: OutcomeVector,
    z: SurrogateConfounders | None = None,
    order: list[str] | None = None,
    alpha: float = 0.05,
) -> SweepTable:
    """Fit [intercept | first t causes | surrogates?] for t = 1..D."""
    if a.has_missing:
        raise ValidationError("causes must be complete; impute first")
    yv = np.asarray(y.values, dtype=float)
    if yv.shape[0] != a.n_units:
        raise ValidationError("outcome length disagrees with the causes")
    if order is None:
        order = list(a.column_names)
    if sorted(order) != sorted(a.column_names):
        raise ValidationError("order must be a permutation of the cause columns")
    col = {name: a.column_names.index(name) for name in order}

    z_block = None
    z_names: list[str] = []
    if z is not None:
        if z.values.shape[0] != a.n_units:
            raise ValidationError("surrogates disagree on the number of units")
        zv, kept = _surrogate_design(z)
        z_block = zv
        z_names = [f"z{j + 1}" for j in kept]

    n = a.n_units
    cells: list[dict[str, SweepCell]] = []
    for t in range(1, len(order) + 1):
        included = order[:t]
        blocks = [np.ones((n, 1)), a.values[:, [col[c] for c in included]]]
        names = ["Intercept"] + included
        if z_block is not None and z_block.size:
            blocks.append(z_block)
            names += z_names
        report = ols_fit(np.column_stack(blocks), yv, names)
        cells.append(
            {
                c: SweepCell(
                    coefficient=report.rows[1 + i].mean,
                    p_value=report.rows[1 + i].p_value,
                    significant=report.rows[1 + i].p_value <= alpha,
                )
                for i, c in enumerate(included)
            }
        )

    flips: list[SignFlip] = []
    for rank, cause in enumerate(order):
        for t in range(rank + 2, len(order) + 1):
            prev, cur = cells[t - 2].get(cause), cells[t - 1].get(cause)
            if prev is None or cur is None:
                continue
            if not (prev.significant and cur.significant):
                continue
            s_prev = int(np.sign(prev.coefficient))
            s_cur = int(np.sign(cur.coefficient))
            if s_prev != 0 and s_cur != 0 and s_prev != s_cur:
                flips.append(
                    SignFlip(cause=cause, step=t, from_sign=s_prev, to_sign=s_cur)
                )

    return SweepTable(
        order=list(order),
        cells=cells,
        flips=flips,
        mode="noncausal" if z is None else "causal",
    )
