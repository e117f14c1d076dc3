"""Row-oriented builder for standard-form cone programs.

The formulations in this package are naturally written variable-by-variable
and row-by-row; this module collects them into the ``ConeProblem`` standard
form (equalities over a cone-partitioned variable vector).  Inequalities are
lowered by the callers with explicit nonnegative slack variables, which keeps
the mapping from model rows to matrix rows one-to-one and makes per-scenario
patching of coefficients trivial.

``PatchedFamily`` wraps a built problem with (row, col) -> data-position
lookup so that a template can be re-instantiated for thousands of scenarios
by copying the value array and overwriting a few entries, without rebuilding
the sparse matrix.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .conic import FREE, NONNEG, SOC, ConeProblem
from .errors import UsageError


class ConeModel:
    """Incrementally builds a ``ConeProblem``."""

    def __init__(self):
        self._cones = []
        self._names = {}
        self._ncols = 0
        self._obj_cols = []
        self._obj_vals = []
        self._rows_cols = []
        self._rows_vals = []
        self._rhs = []

    # -- variables --------------------------------------------------------

    def _add(self, name, kind, dim):
        if name in self._names:
            raise UsageError(f"duplicate variable name {name!r}")
        idx = np.arange(self._ncols, self._ncols + dim, dtype=np.intp)
        self._ncols += dim
        self._cones.append((kind, dim))
        self._names[name] = idx
        return idx

    def add_free(self, name, n=1):
        return self._add(name, FREE, n)

    def add_nonneg(self, name, n=1):
        return self._add(name, NONNEG, n)

    def add_soc(self, name, dim):
        """One second-order cone block; index 0 is the head."""
        return self._add(name, SOC, dim)

    # -- rows and objective -------------------------------------------------

    def add_eq(self, cols, vals, rhs) -> int:
        """Append the equality  sum(vals * x[cols]) = rhs;  returns its row index."""
        row = len(self._rhs)
        self._rows_cols.append(np.asarray(cols, dtype=np.intp))
        self._rows_vals.append(np.asarray(vals, dtype=float))
        self._rhs.append(float(rhs))
        return row

    def obj(self, cols, vals):
        self._obj_cols.append(np.asarray(cols, dtype=np.intp))
        self._obj_vals.append(np.asarray(vals, dtype=float))

    @property
    def num_rows(self):
        return len(self._rhs)

    def build(self) -> ConeProblem:
        n = self._ncols
        m = len(self._rhs)
        c = np.zeros(n)
        for cols, vals in zip(self._obj_cols, self._obj_vals):
            np.add.at(c, cols, vals)
        if m:
            rows = np.concatenate([np.full(len(cc), i, dtype=np.intp)
                                   for i, cc in enumerate(self._rows_cols)])
            cols = np.concatenate(self._rows_cols)
            vals = np.concatenate(self._rows_vals)
        else:
            rows = cols = np.zeros(0, dtype=np.intp)
            vals = np.zeros(0)
        A = sp.csc_matrix((vals, (rows, cols)), shape=(m, n))
        A.sum_duplicates()
        A.sort_indices()
        return ConeProblem(c=c, A=A, b=np.asarray(self._rhs), cones=tuple(self._cones),
                           var_names=dict(self._names))


class PatchedFamily:
    """A template problem whose numeric entries can be cheaply overwritten.

    ``positions(pairs)`` resolves (row, col) coordinates to positions in the
    CSC data array once; ``instantiate`` then produces a new ``ConeProblem``
    sharing the symbolic structure, with selected matrix entries and
    right-hand sides replaced.
    """

    def __init__(self, prob: ConeProblem):
        self.base = prob
        coo = prob.A.tocoo()  # data order matches csc storage order
        self._pos = {(int(r), int(cl)): i for i, (r, cl) in enumerate(zip(coo.row, coo.col))}

    def positions(self, pairs) -> np.ndarray:
        try:
            return np.asarray([self._pos[(int(r), int(c))] for r, c in pairs], dtype=np.intp)
        except KeyError as exc:
            raise UsageError(f"no structural entry at coordinate {exc}") from None

    def instantiate(self, data_pos=None, data_val=None, b_pos=None, b_val=None) -> ConeProblem:
        A = self.base.A
        data = A.data.copy()
        if data_pos is not None:
            data[data_pos] = data_val
        b = self.base.b.copy()
        if b_pos is not None:
            b[b_pos] = b_val
        A2 = sp.csc_matrix((data, A.indices, A.indptr), shape=A.shape)
        return ConeProblem(c=self.base.c, A=A2, b=b, cones=self.base.cones,
                           var_names=self.base.var_names)
