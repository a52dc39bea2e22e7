import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import linprog  # type: ignore
from scipy.sparse import csr_matrix  # type: ignore

from src.config import DEFAULT_CONFIG, SolverConfig
from src.errors import LpFailure

logger = logging.getLogger(__name__)

Row = Dict[int, Fraction]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LinearProgram:
    """minimize objective·x subject to the rows, x >= 0"""

    num_variables: int
    objective: Row = field(default_factory=dict)
    equalities: List[Tuple[Row, Fraction]] = field(default_factory=list)
    inequalities: List[Tuple[Row, Fraction]] = field(default_factory=list)

    def add_variable(self) -> int:
        self.num_variables += 1
        return self.num_variables - 1

    def add_equality(self, row: Row, rhs: Fraction) -> None:
        self.equalities.append(({j: Fraction(v) for j, v in row.items() if v != 0}, Fraction(rhs)))

    def add_inequality(self, row: Row, rhs: Fraction) -> None:
        self.inequalities.append(({j: Fraction(v) for j, v in row.items() if v != 0}, Fraction(rhs)))

    def restricted(self, columns: List[int]) -> "LinearProgram":
        """The same program with every variable outside `columns` fixed to 0, renumbered."""
        position = {j: i for i, j in enumerate(columns)}

        def project(row: Row) -> Row:
            return {position[j]: v for j, v in row.items() if j in position}

        return LinearProgram(
            len(columns),
            project(self.objective),
            [(project(row), rhs) for row, rhs in self.equalities],
            [(project(row), rhs) for row, rhs in self.inequalities],
        )


@dataclass
class LpResult:
    status: str
    value: Optional[Fraction] = None
    x: Optional[List[Fraction]] = None
    exact: bool = True


class _Tableau:
    def __init__(self, rows: List[List[Fraction]], basis: List[int]):
        self.rows = rows
        self.basis = basis
        self.objective: List[Fraction] = []

    def pivot(self, r: int, c: int) -> None:
        pivot_row = self.rows[r]
        p = pivot_row[c]
        if p != 1:
            pivot_row[:] = [v / p for v in pivot_row]
        nonzero = [j for j, v in enumerate(pivot_row) if v != 0]
        for other in self.rows + [self.objective]:
            if other is pivot_row:
                continue
            factor = other[c]
            if factor != 0:
                for j in nonzero:
                    other[j] -= factor * pivot_row[j]
        self.basis[r] = c

    def run(self, allowed: int) -> str:
        # Bland's rule: least entering index, least leaving basis index
        while True:
            entering = next((j for j in range(allowed) if self.objective[j] < 0), None)
            if entering is None:
                return OPTIMAL
            best: Optional[Tuple[Fraction, int, int]] = None
            for i, row in enumerate(self.rows):
                if row[entering] > 0:
                    key = (row[-1] / row[entering], self.basis[i], i)
                    if best is None or key < best:
                        best = key
            if best is None:
                return UNBOUNDED
            self.pivot(best[2], entering)


def solve_exact_lp(lp: LinearProgram) -> LpResult:
    n = lp.num_variables
    slack = len(lp.inequalities)
    width = n + slack
    rows: List[List[Fraction]] = []
    for i, (row, rhs) in enumerate(lp.inequalities):
        dense = [Fraction(0)] * width
        for j, v in row.items():
            dense[j] = v
        dense[n + i] = Fraction(1)
        rows.append(dense + [rhs])
    for row, rhs in lp.equalities:
        dense = [Fraction(0)] * width
        for j, v in row.items():
            dense[j] = v
        rows.append(dense + [rhs])
    m = len(rows)
    for row in rows:
        if row[-1] < 0:
            row[:] = [-v for v in row]

    # phase 1: one artificial per row
    full = []
    for i, row in enumerate(rows):
        artificial = [Fraction(0)] * m
        artificial[i] = Fraction(1)
        full.append(row[:-1] + artificial + [row[-1]])
    tableau = _Tableau(full, [width + i for i in range(m)])
    tableau.objective = [-sum((row[j] for row in full), Fraction(0)) for j in range(width)]
    tableau.objective += [Fraction(0)] * m + [-sum((row[-1] for row in full), Fraction(0))]
    status = tableau.run(width)
    assert status == OPTIMAL
    if tableau.objective[-1] != 0:
        return LpResult(INFEASIBLE)

    for i in reversed(range(len(tableau.rows))):
        if tableau.basis[i] >= width:
            column = next((j for j in range(width) if tableau.rows[i][j] != 0), None)
            if column is None:
                del tableau.rows[i]
                del tableau.basis[i]
            else:
                tableau.pivot(i, column)
    for row in tableau.rows:
        del row[width:-1]

    # phase 2
    cost = [lp.objective.get(j, Fraction(0)) for j in range(width)]
    objective = cost + [Fraction(0)]
    for i, row in enumerate(tableau.rows):
        cb = cost[tableau.basis[i]]
        if cb != 0:
            objective = [o - cb * v for o, v in zip(objective, row)]
    tableau.objective = objective
    status = tableau.run(width)
    if status == UNBOUNDED:
        return LpResult(UNBOUNDED)
    x = [Fraction(0)] * width
    for i, row in enumerate(tableau.rows):
        x[tableau.basis[i]] = row[-1]
    value = sum((lp.objective.get(j, Fraction(0)) * x[j] for j in range(n)), Fraction(0))
    return LpResult(OPTIMAL, value, x[:n], True)


def _to_sparse(rows: List[Tuple[Row, Fraction]], n: int) -> Tuple[Optional[csr_matrix], Optional[np.ndarray]]:
    if not rows:
        return None, None
    data, indices, indptr = [], [], [0]
    for row, _ in rows:
        for j, v in sorted(row.items()):
            indices.append(j)
            data.append(float(v))
        indptr.append(len(indices))
    matrix = csr_matrix((data, indices, indptr), shape=(len(rows), n))
    return matrix, np.array([float(rhs) for _, rhs in rows])


def _dense_rows(matrix: Optional[np.ndarray], rhs: Optional[np.ndarray], columns: List[int]) -> List[Tuple[Row, Fraction]]:
    if matrix is None or rhs is None:
        return []
    block = matrix[:, columns]
    rows = []
    for i in range(block.shape[0]):
        row = {j: Fraction(int(v)) for j, v in enumerate(block[i].tolist()) if v != 0}
        rows.append((row, Fraction(int(rhs[i]))))
    return rows


def integer_program_from_arrays(
    c: np.ndarray,
    a_ub: Optional[np.ndarray],
    b_ub: Optional[np.ndarray],
    a_eq: Optional[np.ndarray],
    b_eq: Optional[np.ndarray],
    columns: Optional[List[int]] = None,
) -> LinearProgram:
    """Exact program from dense integer-valued arrays, keeping only `columns`."""
    if columns is None:
        columns = list(range(len(c)))
    objective = {i: Fraction(int(c[j])) for i, j in enumerate(columns) if c[j] != 0}
    return LinearProgram(
        len(columns), objective, _dense_rows(a_eq, b_eq, columns), _dense_rows(a_ub, b_ub, columns)
    )


def _highs(
    c: np.ndarray,
    a_ub: object,
    b_ub: Optional[np.ndarray],
    a_eq: object,
    b_eq: Optional[np.ndarray],
    config: SolverConfig,
) -> object:
    result = linprog(
        c,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=(0, None),
        method="highs",
        options={"primal_feasibility_tolerance": config.lp_tolerance},
    )
    if result.status not in (0, 2, 3):
        raise LpFailure(f"HiGHS failed with status {result.status}: {result.message}")
    return result


def _refine(
    result: object,
    restrict: Callable[[List[int]], LinearProgram],
    full: Callable[[List[Fraction]], Tuple[Fraction, bool]],
    config: SolverConfig,
) -> LpResult:
    status = getattr(result, "status")
    if status == 2:
        return LpResult(INFEASIBLE, exact=False)
    if status == 3:
        return LpResult(UNBOUNDED, exact=False)
    values = getattr(result, "x")
    fun = float(getattr(result, "fun"))
    n = len(values)
    support = [j for j in range(n) if values[j] > config.lp_tolerance]
    if len(support) <= config.exact_lp_max_variables:
        exact = solve_exact_lp(restrict(support))
        if exact.status == OPTIMAL and exact.x is not None and exact.value is not None:
            if float(exact.value) <= fun + max(1.0, abs(fun)) * 1e-6:
                x = [Fraction(0)] * n
                for j, v in zip(support, exact.x):
                    x[j] = v
                return LpResult(OPTIMAL, exact.value, x, True)

    logger.warning("Could not re-verify the floating-point LP optimum exactly; support size %d", len(support))
    x = [Fraction(float(v)).limit_denominator(10**9) if v > config.lp_tolerance else Fraction(0) for v in values]
    value, feasible = full(x)
    return LpResult(OPTIMAL, value, x, feasible)


def _evaluate(lp: LinearProgram, x: List[Fraction]) -> Tuple[Fraction, bool]:
    value = sum((v * x[j] for j, v in lp.objective.items()), Fraction(0))
    feasible = all(v >= 0 for v in x)
    for row, rhs in lp.equalities:
        feasible = feasible and sum((v * x[j] for j, v in row.items()), Fraction(0)) == rhs
    for row, rhs in lp.inequalities:
        feasible = feasible and sum((v * x[j] for j, v in row.items()), Fraction(0)) <= rhs
    return value, feasible


def solve_lp(lp: LinearProgram, config: SolverConfig = DEFAULT_CONFIG) -> LpResult:
    rows = len(lp.equalities) + len(lp.inequalities)
    if lp.num_variables <= config.exact_lp_max_variables:
        logger.debug("Exact simplex: %d variables, %d rows", lp.num_variables, rows)
        return solve_exact_lp(lp)
    logger.info("HiGHS: %d variables, %d rows", lp.num_variables, rows)
    c = np.zeros(lp.num_variables)
    for j, v in lp.objective.items():
        c[j] = float(v)
    a_ub, b_ub = _to_sparse(lp.inequalities, lp.num_variables)
    a_eq, b_eq = _to_sparse(lp.equalities, lp.num_variables)
    result = _highs(c, a_ub, b_ub, a_eq, b_eq, config)
    return _refine(result, lp.restricted, lambda x: _evaluate(lp, x), config)


def solve_array_lp(
    c: np.ndarray,
    a_ub: Optional[np.ndarray],
    b_ub: Optional[np.ndarray],
    a_eq: Optional[np.ndarray],
    b_eq: Optional[np.ndarray],
    config: SolverConfig = DEFAULT_CONFIG,
) -> LpResult:
    """Like solve_lp, for programs given as dense arrays of exact integers."""
    n = len(c)
    if n <= config.exact_lp_max_variables:
        logger.debug("Exact simplex: %d variables", n)
        return solve_exact_lp(integer_program_from_arrays(c, a_ub, b_ub, a_eq, b_eq))
    logger.info("HiGHS: %d variables, %d rows", n, sum(0 if a is None else a.shape[0] for a in (a_ub, a_eq)))
    result = _highs(
        c,
        None if a_ub is None else csr_matrix(a_ub),
        b_ub,
        None if a_eq is None else csr_matrix(a_eq),
        b_eq,
        config,
    )

    def restrict(columns: List[int]) -> LinearProgram:
        return integer_program_from_arrays(c, a_ub, b_ub, a_eq, b_eq, columns)

    def full(x: List[Fraction]) -> Tuple[Fraction, bool]:
        support = [j for j, v in enumerate(x) if v != 0]
        return _evaluate(restrict(support), [x[j] for j in support])

    return _refine(result, restrict, full, config)
