"""Exact sparse linear solving over the rationals.

Rows are sparse dicts (column index -> Fraction).  Elimination keeps a
reduced pivot per column; every incoming row is reduced against existing
pivots before becoming one itself, so extraction is a single reverse pass.
"""

from __future__ import annotations

from fractions import Fraction


def solve_sparse(rows: list[dict[int, Fraction]], rhs: list[Fraction],
                 ncols: int) -> list[Fraction] | None:
    """One exact solution of rows * x = rhs, or None if inconsistent.

    Free variables are set to zero.  Rows and rhs are not modified.
    """
    if len(rows) != len(rhs):
        raise ValueError("row/rhs length mismatch")
    pivots: dict[int, tuple[dict[int, Fraction], Fraction]] = {}
    order: list[int] = []
    for row, b in zip(rows, rhs):
        work = {c: v for c, v in row.items() if v}
        val = b
        # reduce against known pivots until no pivot column remains
        while True:
            hit = None
            for c in work:
                if c in pivots:
                    hit = c
                    break
            if hit is None:
                break
            factor = work.pop(hit)
            prow, pval = pivots[hit]
            for c, v in prow.items():
                if c == hit:
                    continue
                nv = work.get(c, Fraction(0)) - factor * v
                if nv:
                    work[c] = nv
                else:
                    work.pop(c, None)
            val = val - factor * pval
        if not work:
            if val:
                return None
            continue
        lead = min(work)
        inv = Fraction(1) / work[lead]
        work = {c: v * inv for c, v in work.items()}
        pivots[lead] = (work, val * inv)
        order.append(lead)
    out = [Fraction(0)] * ncols
    for lead in reversed(order):
        prow, pval = pivots[lead]
        acc = pval
        for c, v in prow.items():
            if c != lead:
                acc -= v * out[c]
        out[lead] = acc
    return out
