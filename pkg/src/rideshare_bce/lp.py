"""Dense linear programming: two-phase simplex and a brute-force oracle.

Problems are always ``minimize c @ x`` subject to ``A_eq @ x == b_eq``,
``A_le @ x <= b_le`` and ``x >= 0``.

:func:`solve_lp` is a tableau simplex using Bland's rule in both phases
(lowest-index entering column, lowest-index basic variable on ratio ties),
so its pivot sequence, and hence the returned vertex, is fully determined
by the input.  :func:`vertex_oracle` enumerates basic solutions outright
and exists to check the simplex on small problems.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

DEFAULT_TOL = 1e-9
ORACLE_MAX_VARS = 8


class LPStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"

    def __str__(self):
        return self.value


class LPDimensionError(ValueError):
    pass


class OracleScaleError(ValueError):
    pass


def _matrix(a, n: int) -> np.ndarray:
    if a is None:
        return np.zeros((0, n))
    a = np.array(a, dtype=float)
    if a.size == 0:
        return a.reshape(0, n)
    return np.atleast_2d(a)


def _vector(b) -> np.ndarray:
    if b is None:
        return np.zeros(0)
    return np.array(b, dtype=float).reshape(-1)


@dataclass(frozen=True, eq=False)
class LinearProgram:
    c: np.ndarray
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    A_le: Optional[np.ndarray] = None
    b_le: Optional[np.ndarray] = None
    var_names: Optional[Sequence[str]] = None
    eq_names: Optional[Sequence[str]] = None
    le_names: Optional[Sequence[str]] = None

    def __post_init__(self):
        c = _vector(self.c)
        n = c.size
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A_eq", _matrix(self.A_eq, n))
        object.__setattr__(self, "b_eq", _vector(self.b_eq))
        object.__setattr__(self, "A_le", _matrix(self.A_le, n))
        object.__setattr__(self, "b_le", _vector(self.b_le))

    @property
    def n(self) -> int:
        return self.c.size

    def check(self) -> None:
        """Raise :class:`LPDimensionError` on inconsistent or non-finite data."""
        n = self.n
        for name, a, b in (("eq", self.A_eq, self.b_eq),
                           ("le", self.A_le, self.b_le)):
            if a.ndim != 2 or a.shape[1] != n:
                raise LPDimensionError(
                    f"A_{name} has shape {a.shape}, expected (*, {n})")
            if a.shape[0] != b.size:
                raise LPDimensionError(
                    f"A_{name} has {a.shape[0]} rows but b_{name} has {b.size}")
        for name, arr in (("c", self.c), ("A_eq", self.A_eq), ("b_eq", self.b_eq),
                          ("A_le", self.A_le), ("b_le", self.b_le)):
            if not np.all(np.isfinite(arr)):
                raise LPDimensionError(f"{name} has non-finite entries")
        for names, size, what in ((self.var_names, n, "var_names"),
                                  (self.eq_names, self.b_eq.size, "eq_names"),
                                  (self.le_names, self.b_le.size, "le_names")):
            if names is not None and len(names) != size:
                raise LPDimensionError(f"{what} has {len(names)} entries, need {size}")

    def max_violation(self, x: np.ndarray) -> float:
        """Largest residual over equalities, inequalities and bounds."""
        x = np.asarray(x, dtype=float)
        parts = [np.maximum(-x, 0.0)]
        if self.b_eq.size:
            parts.append(np.abs(self.A_eq @ x - self.b_eq))
        if self.b_le.size:
            parts.append(np.maximum(self.A_le @ x - self.b_le, 0.0))
        return float(max(p.max(initial=0.0) for p in parts))

    def with_objective(self, c) -> LinearProgram:
        return LinearProgram(c, self.A_eq, self.b_eq, self.A_le, self.b_le,
                             self.var_names, self.eq_names, self.le_names)

    def without_inequalities(self) -> LinearProgram:
        return LinearProgram(self.c, self.A_eq, self.b_eq, None, None,
                             self.var_names, self.eq_names, None)


@dataclass(frozen=True, eq=False)
class LPSolution:
    status: LPStatus
    x: Optional[np.ndarray]
    objective_value: float
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LPStatus.OPTIMAL


def _pivot(T: np.ndarray, r: int, j: int) -> None:
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    T[np.abs(T) < 1e-14] = 0.0


def _run_simplex(T, basis, cost, tol, max_iter, start_iter=0):
    """Bland-rule primal simplex on tableau ``T`` (last column is the rhs).

    Returns ``(status, iterations)``; ``T`` and ``basis`` are updated in place.
    """
    it = start_iter
    ncols = T.shape[1] - 1
    while True:
        reduced = cost - cost[basis] @ T[:, :ncols]
        eligible = np.flatnonzero(reduced < -tol)
        if eligible.size == 0:
            return LPStatus.OPTIMAL, it
        j = int(eligible[0])
        col = T[:, j]
        rows = np.flatnonzero(col > tol)
        if rows.size == 0:
            return LPStatus.UNBOUNDED, it
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        tied = rows[ratios <= best + tol * max(1.0, abs(best))]
        r = int(min(tied, key=lambda k: basis[k]))
        _pivot(T, r, j)
        basis[r] = j
        it += 1
        if it > max_iter:
            raise RuntimeError(f"simplex exceeded {max_iter} pivots")


def solve_lp(lp: LinearProgram, tolerance: float = DEFAULT_TOL,
             max_iter: int = 100_000) -> LPSolution:
    """Two-phase primal simplex; phase 1 minimizes the sum of artificials."""
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    lp.check()
    n = lp.n
    m_eq, m_le = lp.b_eq.size, lp.b_le.size
    m = m_eq + m_le
    n_struct = n + m_le
    A = np.zeros((m, n_struct))
    A[:m_eq, :n] = lp.A_eq
    A[m_eq:, :n] = lp.A_le
    A[m_eq:, n:] = np.eye(m_le)
    b = np.concatenate([lp.b_eq, lp.b_le])
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1

    basis = [-1] * m
    for k in range(m_le):
        if not flip[m_eq + k]:
            basis[m_eq + k] = n + k
    art_rows = [r for r in range(m) if basis[r] < 0]
    n_art = len(art_rows)
    T = np.zeros((m, n_struct + n_art + 1))
    T[:, :n_struct] = A
    T[:, -1] = b
    for k, r in enumerate(art_rows):
        T[r, n_struct + k] = 1.0
        basis[r] = n_struct + k
    basis_arr = np.array(basis, dtype=int)

    iters = 0
    if n_art:
        cost1 = np.zeros(n_struct + n_art)
        cost1[n_struct:] = 1.0
        _, iters = _run_simplex(T, basis_arr, cost1, tolerance, max_iter)
        infeas = float(cost1[basis_arr] @ T[:, -1])
        scale = 1.0 + float(np.abs(b).max(initial=0.0))
        if infeas > tolerance * 1e3 * scale:
            return LPSolution(LPStatus.INFEASIBLE, None, float("nan"), iters)
        keep = []
        for r in range(T.shape[0]):
            if basis_arr[r] >= n_struct:
                cand = np.flatnonzero(np.abs(T[r, :n_struct]) > tolerance)
                if cand.size:
                    _pivot(T, r, int(cand[0]))
                    basis_arr[r] = int(cand[0])
                    iters += 1
                    keep.append(r)
                # otherwise the row is redundant and dropped
            else:
                keep.append(r)
        T = np.delete(T[keep], np.s_[n_struct:n_struct + n_art], axis=1)
        basis_arr = basis_arr[keep]

    cost2 = np.zeros(n_struct)
    cost2[:n] = lp.c
    status, iters = _run_simplex(T, basis_arr, cost2, tolerance, max_iter, iters)
    if status is LPStatus.UNBOUNDED:
        return LPSolution(status, None, float("-inf"), iters)
    full = np.zeros(n_struct)
    full[basis_arr] = T[:, -1]
    x = full[:n]
    x[np.abs(x) < tolerance] = 0.0
    return LPSolution(LPStatus.OPTIMAL, x, float(lp.c @ x), iters)


def _basic_points(rows: np.ndarray, rhs: np.ndarray, n: int,
                  fixed: Optional[tuple[np.ndarray, float]] = None) -> np.ndarray:
    """Solutions of every nonsingular n-row subsystem.

    With ``fixed`` the given row is part of every subsystem and ``n - 1`` rows
    are drawn from ``rows``.
    """
    k = n - 1 if fixed is not None else n
    combos = list(itertools.combinations(range(rows.shape[0]), k))
    idx = np.array(combos, dtype=int).reshape(len(combos), k)
    if idx.shape[0] == 0:
        return np.zeros((0, n))
    M = rows[idx]
    r = rhs[idx]
    if fixed is not None:
        frow, fval = fixed
        M = np.concatenate([M, np.broadcast_to(frow, (M.shape[0], 1, n))], axis=1)
        r = np.concatenate([r, np.full((r.shape[0], 1), fval)], axis=1)
    sv = np.linalg.svd(M, compute_uv=False)
    ok = sv[:, -1] > 1e-9 * np.maximum(sv[:, 0], 1.0)
    if not ok.any():
        return np.zeros((0, n))
    return np.linalg.solve(M[ok], r[ok][..., None])[..., 0]


def _feasible_mask(lp: LinearProgram, X: np.ndarray, homogeneous: bool,
                   ftol: float) -> np.ndarray:
    mask = np.all(X >= -ftol, axis=1)
    if lp.b_eq.size:
        target = 0.0 if homogeneous else lp.b_eq
        mask &= np.all(np.abs(X @ lp.A_eq.T - target) <= ftol, axis=1)
    if lp.b_le.size:
        target = 0.0 if homogeneous else lp.b_le
        mask &= np.all(X @ lp.A_le.T <= target + ftol, axis=1)
    return mask


def vertex_oracle(lp: LinearProgram, tolerance: float = 1e-8) -> LPSolution:
    """Solve by enumerating every basic solution (test oracle, n <= 8).

    Unboundedness is decided on the recession cone ``{d >= 0, A_eq d = 0,
    A_le d <= 0, sum(d) = 1}``: the LP is unbounded iff it is feasible and
    some vertex of that slice has ``c @ d < 0``.
    """
    lp.check()
    n = lp.n
    if n > ORACLE_MAX_VARS:
        raise OracleScaleError(f"vertex oracle refuses n={n} > {ORACLE_MAX_VARS}")
    rows = np.vstack([lp.A_eq, lp.A_le, -np.eye(n)])
    rhs = np.concatenate([lp.b_eq, lp.b_le, np.zeros(n)])
    scale = 1.0 + float(np.abs(rhs).max(initial=0.0))
    ftol = tolerance * scale

    pts = _basic_points(rows, rhs, n)
    pts = pts[_feasible_mask(lp, pts, False, ftol)]
    if pts.shape[0] == 0:
        return LPSolution(LPStatus.INFEASIBLE, None, float("nan"))

    dirs = _basic_points(rows, np.zeros_like(rhs), n, fixed=(np.ones(n), 1.0))
    dirs = dirs[_feasible_mask(lp, dirs, True, tolerance)]
    if dirs.shape[0] and float((dirs @ lp.c).min()) < -tolerance:
        return LPSolution(LPStatus.UNBOUNDED, None, float("-inf"))

    values = pts @ lp.c
    k = int(np.argmin(values))
    x = np.where(np.abs(pts[k]) < tolerance, 0.0, pts[k])
    return LPSolution(LPStatus.OPTIMAL, x, float(lp.c @ x))


def _fmt_coef(v: float) -> str:
    return repr(float(v)) if v != int(v) else str(int(v))


def _lp_terms(coefs: np.ndarray, names: Sequence[str]) -> str:
    parts = []
    for v, name in zip(coefs, names):
        if v == 0:
            continue
        sign = "-" if v < 0 else "+"
        parts.append(f"{sign} {_fmt_coef(abs(v))} {name}")
    if not parts:
        return f"0 {names[0]}" if names else "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def to_lp_format(lp: LinearProgram, title: str = "") -> str:
    """Render in CPLEX LP text format for external cross-checks.

    Variables default to ``x1..xn``; bounds are the LP-format default
    ``x >= 0`` and therefore not written.
    """
    lp.check()
    names = list(lp.var_names or [f"x{j + 1}" for j in range(lp.n)])
    eq_names = list(lp.eq_names or [f"eq{k + 1}" for k in range(lp.b_eq.size)])
    le_names = list(lp.le_names or [f"le{k + 1}" for k in range(lp.b_le.size)])
    lines = []
    if title:
        lines.append(f"\\ {title}")
    lines += ["Minimize", f" obj: {_lp_terms(lp.c, names)}", "Subject To"]
    for name, row, rhs in zip(eq_names, lp.A_eq, lp.b_eq):
        lines.append(f" {name}: {_lp_terms(row, names)} = {_fmt_coef(rhs)}")
    for name, row, rhs in zip(le_names, lp.A_le, lp.b_le):
        lines.append(f" {name}: {_lp_terms(row, names)} <= {_fmt_coef(rhs)}")
    lines.append("End")
    return "\n".join(lines) + "\n"
