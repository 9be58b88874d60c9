"""Doubly stochastic mixing matrices in floating or exact rational form.

Exact matrices are stored as integer numerators over one common
denominator, which keeps the quantized update in integer arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd, lcm

import numpy as np

from .topology import Graph

__all__ = [
    "WeightMatrix",
    "ValidationReport",
    "metropolis",
    "modified_metropolis",
    "validate_assumption1",
    "validate_assumption4",
    "mask_to_active",
]

FLOAT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """Mixing weights.

    ``values`` holds floats when ``den`` is None, otherwise integer
    numerators (object dtype) of the exact entries ``values / den``.
    """

    values: np.ndarray
    den: int | None = None

    @classmethod
    def from_fractions(cls, entries) -> "WeightMatrix":
        fr = [[Fraction(x) for x in row] for row in entries]
        d = lcm(*(x.denominator for row in fr for x in row))
        num = np.array([[x.numerator * (d // x.denominator) for x in row] for row in fr], dtype=object)
        return cls(num, d)._reduced()

    @classmethod
    def from_float(cls, entries) -> "WeightMatrix":
        return cls(np.asarray(entries, dtype=float))

    def _reduced(self) -> "WeightMatrix":
        if self.den is None:
            return self
        g = self.den
        for v in self.values.flat:
            g = gcd(g, int(v))
        if g > 1:
            return WeightMatrix(np.array([[int(v) // g for v in row] for row in self.values], dtype=object),
                                self.den // g)
        return self

    @property
    def exact(self) -> bool:
        return self.den is not None

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def entry(self, i: int, j: int):
        if self.exact:
            return Fraction(int(self.values[i, j]), self.den)
        return float(self.values[i, j])

    def to_fractions(self) -> np.ndarray:
        if not self.exact:
            raise TypeError("floating weight matrix has no exact form")
        out = np.empty(self.values.shape, dtype=object)
        for idx, v in np.ndenumerate(self.values):
            out[idx] = Fraction(int(v), self.den)
        return out

    @cached_property
    def dense(self) -> np.ndarray:
        """Floating view of the entries."""
        if self.exact:
            out = np.array([[int(v) / self.den for v in row] for row in self.values], dtype=float)
        else:
            out = np.array(self.values, dtype=float)
        out.setflags(write=False)
        return out

    def support(self) -> np.ndarray:
        off = self.values != 0
        np.fill_diagonal(off, False)
        return off

    def to_text(self) -> str:
        rows = []
        for i in range(self.n):
            if self.exact:
                rows.append(" ".join(str(self.entry(i, j)) if self.values[i, j] else "0"
                                     for j in range(self.n)))
            else:
                rows.append(" ".join(repr(float(v)) for v in self.values[i]))
        return "\n".join(rows) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "WeightMatrix":
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        if any("/" in tok for row in rows for tok in row):
            return cls.from_fractions(rows)
        return cls.from_float([[float(tok) for tok in row] for row in rows])


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _metropolis_entries(g: Graph, scale: Fraction) -> list[list[Fraction]]:
    deg = g.degrees
    w = [[Fraction(0)] * g.n for _ in range(g.n)]
    for i, j in g.edges:
        w[i][j] = w[j][i] = 1 / (scale * (1 + max(int(deg[i]), int(deg[j]))))
    for i in range(g.n):
        w[i][i] = 1 - sum(w[i][j] for j in range(g.n) if j != i)
    return w


def metropolis(g: Graph, exact: bool = False) -> WeightMatrix:
    """Metropolis weights ``1 / (1 + max(d_i, d_j))`` on edges."""
    if g.directed:
        raise ValueError("Metropolis weights need an undirected graph")
    if exact:
        return WeightMatrix.from_fractions(_metropolis_entries(g, Fraction(1)))
    deg = g.degrees
    w = np.zeros((g.n, g.n))
    if g.edges:
        i, j = np.asarray(g.edges).T
        w[i, j] = w[j, i] = 1.0 / (1.0 + np.maximum(deg[i], deg[j]))
    w[np.diag_indices(g.n)] = 1.0 - w.sum(axis=1)
    return WeightMatrix(w)


def modified_metropolis(g: Graph, C=2) -> WeightMatrix:
    """Scaled-down Metropolis weights ``1 / (C (1 + max(d_i, d_j)))``, exact.

    Raises ``ValueError`` if some diagonal entry is not above 1/2.
    """
    if g.directed:
        raise ValueError("Metropolis weights need an undirected graph")
    C = Fraction(str(C)) if isinstance(C, float) else Fraction(C)
    if C <= 1:
        raise ValueError(f"C must exceed 1, got {C}")
    w = _metropolis_entries(g, C)
    bad = [i for i in range(g.n) if w[i][i] <= Fraction(1, 2)]
    if bad:
        raise ValueError(f"diagonal entries not dominant at vertices {bad} "
                         f"(w_ii = {w[bad[0]][bad[0]]}); increase C")
    return WeightMatrix.from_fractions(w)


def validate_assumption1(W: WeightMatrix, graph: Graph | None = None, tol: float = FLOAT_TOL) -> ValidationReport:
    """Symmetric, doubly stochastic, positive diagonal, graph-consistent."""
    rep = ValidationReport()
    if W.exact:
        a = W.values
        rows = [sum(a[i]) for i in range(W.n)]
        cols = [sum(a[:, j]) for j in range(W.n)]
        if any(r != W.den for r in rows) or any(c != W.den for c in cols):
            rep.violations.append("not doubly stochastic")
        if any(a[i, j] != a[j, i] for i in range(W.n) for j in range(i)):
            rep.violations.append("asymmetric")
        if any(v < 0 for v in a.flat):
            rep.violations.append("negative entry")
        if any(a[i, i] <= 0 for i in range(W.n)):
            rep.violations.append("nonpositive diagonal")
    else:
        a = np.asarray(W.values, dtype=float)
        if (np.abs(a.sum(axis=1) - 1) > tol).any() or (np.abs(a.sum(axis=0) - 1) > tol).any():
            rep.violations.append("not doubly stochastic")
        if (np.abs(a - a.T) > tol).any():
            rep.violations.append("asymmetric")
        if (a < -tol).any():
            rep.violations.append("negative entry")
        if (np.diag(a) <= 0).any():
            rep.violations.append("nonpositive diagonal")
    if graph is not None:
        if graph.n != W.n:
            rep.violations.append(f"graph has {graph.n} vertices, matrix {W.n}")
        else:
            allowed = graph.adjacency | graph.adjacency.T
            if (W.support() & ~allowed).any():
                rep.violations.append("nonzero weight on a non-edge")
    return rep


def validate_assumption4(W: WeightMatrix, graph: Graph | None = None) -> ValidationReport:
    """Dominant diagonal (> 1/2) and rational edge weights in (0, 1)."""
    if not W.exact:
        raise TypeError("quantized regime requires an exact rational weight matrix")
    rep = ValidationReport()
    half = Fraction(1, 2)
    low = [i for i in range(W.n) if W.entry(i, i) <= half]
    if low:
        rep.violations.append(f"diagonal not above 1/2 at {low}")
    on = graph.adjacency if graph is not None else W.support()
    for i, j in zip(*np.nonzero(on)):
        w = W.entry(int(i), int(j))
        if not 0 < w < 1:
            rep.violations.append(f"edge weight w[{i},{j}] = {w} outside (0, 1)")
    return rep


def mask_to_active(W: WeightMatrix, g_active: Graph) -> WeightMatrix:
    """Keep weights on active edges, zero the rest, refill the diagonal."""
    if g_active.n != W.n:
        raise ValueError("dimension mismatch between W and active graph")
    active = g_active.adjacency | g_active.adjacency.T
    if (active & ~W.support()).any():
        raise ValueError("active edge outside the support of W")
    vals = np.where(active, W.values, 0)
    if W.exact:
        vals = vals.astype(object)
        for i in range(W.n):
            vals[i, i] = W.den - sum(vals[i])
    else:
        vals = vals.astype(float)
        vals[np.diag_indices(W.n)] = 1.0 - vals.sum(axis=1)
    return WeightMatrix(vals, W.den)
