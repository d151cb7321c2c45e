"""Exact linear algebra over the Gaussian rationals.

Rows are sparse dicts {column: GaussRat}.  Everything is exact Gaussian
elimination in the field Q(i); no pivots are ever approximated.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Tuple

from bocher.scalars import GaussRat

Row = Dict[int, GaussRat]


def _eliminate(rows: List[Row], rhs: Optional[List[GaussRat]], ncols: int):
    """Row echelon form; returns (pivot rows, pivot cols, reduced rhs)."""
    work = [dict(r) for r in rows]
    b = list(rhs) if rhs is not None else [GaussRat(0)] * len(rows)
    piv_rows: List[Row] = []
    piv_rhs: List[GaussRat] = []
    piv_cols: List[int] = []
    used = [False] * len(work)
    for col in range(ncols):
        k = None
        for i, r in enumerate(work):
            if not used[i] and col in r:
                k = i
                break
        if k is None:
            continue
        used[k] = True
        row = work[k]
        inv = row[col].inv()
        row = {c: v * inv for c, v in row.items()}
        bk = b[k] * inv
        for i, r in enumerate(work):
            if used[i] or col not in r:
                continue
            f = r[col]
            for c, v in row.items():
                s = r.get(c, GaussRat(0)) - f * v
                if s.is_zero():
                    r.pop(c, None)
                else:
                    r[c] = s
            b[i] = b[i] - f * bk
        piv_rows.append(row)
        piv_rhs.append(bk)
        piv_cols.append(col)
    # inconsistency: an unused row with empty coefficients but nonzero rhs
    for i, r in enumerate(work):
        if not used[i] and not r and not b[i].is_zero():
            return None
    return piv_rows, piv_cols, piv_rhs


def solve(rows: List[Row], rhs: List[GaussRat], ncols: int) -> Optional[List[GaussRat]]:
    """One exact solution of rows * x = rhs, or None when inconsistent.

    Free variables are set to zero.
    """
    ech = _eliminate(rows, rhs, ncols)
    if ech is None:
        return None
    piv_rows, piv_cols, piv_rhs = ech
    x = [GaussRat(0)] * ncols
    for row, col, bv in reversed(list(zip(piv_rows, piv_cols, piv_rhs))):
        acc = bv
        for c, v in row.items():
            if c != col:
                acc = acc - v * x[c]
        x[col] = acc
    # verify (cheap insurance against daisy-chained elimination bugs)
    for r, bv in zip(rows, rhs):
        s = GaussRat(0)
        for c, v in r.items():
            s = s + v * x[c]
        if s != bv:
            return None
    return x


def solve_field(rows, rhs, ncols, zero):
    """Like solve(), but over any exact field with is_zero()/inv()."""
    work = [dict(r) for r in rows]
    b = list(rhs)
    piv_rows, piv_rhs, piv_cols = [], [], []
    used = [False] * len(work)
    for col in range(ncols):
        k = None
        for i, r in enumerate(work):
            if not used[i] and col in r and not r[col].is_zero():
                k = i
                break
        if k is None:
            continue
        used[k] = True
        row = work[k]
        inv = row[col].inv()
        row = {c: v * inv for c, v in row.items() if not v.is_zero()}
        bk = b[k] * inv
        for i, r in enumerate(work):
            if used[i] or col not in r or r[col].is_zero():
                continue
            f = r.pop(col)
            for c, v in row.items():
                if c == col:
                    continue
                s = r.get(c, zero) - f * v
                if s.is_zero():
                    r.pop(c, None)
                else:
                    r[c] = s
            b[i] = b[i] - f * bk
        piv_rows.append(row)
        piv_rhs.append(bk)
        piv_cols.append(col)
    for i, r in enumerate(work):
        if not used[i] and all(v.is_zero() for v in r.values()) and not b[i].is_zero():
            return None
    x = [zero] * ncols
    for row, col, bv in reversed(list(zip(piv_rows, piv_cols, piv_rhs))):
        acc = bv
        for c, v in row.items():
            if c != col and not x[c].is_zero():
                acc = acc - v * x[c]
        x[col] = acc
    # residual check
    for r, bv in zip(rows, rhs):
        s = zero
        for c, v in r.items():
            if not x[c].is_zero():
                s = s + v * x[c]
        if not (s - bv).is_zero():
            return None
    return x


def nullspace(rows: List[Row], ncols: int) -> List[List[GaussRat]]:
    """Basis of the exact nullspace of the sparse row system."""
    ech = _eliminate(rows, None, ncols)
    piv_rows, piv_cols, _ = ech
    piv_set = set(piv_cols)
    free = [c for c in range(ncols) if c not in piv_set]
    basis = []
    for fc in free:
        x = [GaussRat(0)] * ncols
        x[fc] = GaussRat(1)
        for row, col in reversed(list(zip(piv_rows, piv_cols))):
            acc = GaussRat(0)
            for c, v in row.items():
                if c != col:
                    acc = acc - v * x[c]
            x[col] = acc
        basis.append(x)
    return basis
