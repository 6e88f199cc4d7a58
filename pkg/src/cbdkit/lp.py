"""Exact linear programming over the rationals.

A dense two-phase simplex with Bland's rule, working on
:class:`fractions.Fraction` so every returned witness satisfies its
constraints with exact equality.  Before the tableau is built, a presolve
pass removes unknowns that some row forces to zero (a row with a zero
right-hand side and sign-definite coefficients).  The coupling programs
built elsewhere in the package are dominated by such rows, which is what
keeps them tractable at desk scale.
"""
import enum
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction

from .errors import SizeCapError, ValidationError

DEFAULT_MAX_UNKNOWNS = 2 ** 20

_ZERO = Fraction(0)


class LpStatus(enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpOutcome:
    status: LpStatus
    witness: tuple = None
    value: Fraction = None


def _exact(v):
    # ints stay ints (cheap for the 0/1 rows of coupling programs)
    if isinstance(v, bool) or isinstance(v, float):
        raise ValidationError(f"coefficients must be exact rationals, got {v!r}")
    return v if isinstance(v, (int, Fraction)) else Fraction(v)


def _as_row(coeffs, n_vars):
    if isinstance(coeffs, Mapping):
        row = {}
        for j, v in coeffs.items():
            if not (isinstance(j, int) and 0 <= j < n_vars):
                raise ValidationError(f"column index {j!r} out of range 0..{n_vars - 1}")
            v = _exact(v)
            if v:
                row[j] = v
        return row
    coeffs = list(coeffs)
    if len(coeffs) != n_vars:
        raise ValidationError(
            f"coefficient vector has length {len(coeffs)}, expected {n_vars}")
    return {j: _exact(v) for j, v in enumerate(coeffs) if v}


class LinearProgram:
    """``A_eq x = b_eq``, ``A_le x <= b_le``, ``x >= 0``, optional objective.

    Coefficient vectors may be given densely (a sequence of length
    ``n_vars``) or sparsely (a mapping from column index to coefficient).
    They are stored sparsely.
    """

    def __init__(self, n_vars, eq=(), le=(), objective=None, sense="min",
                 max_unknowns=DEFAULT_MAX_UNKNOWNS):
        if not isinstance(n_vars, int) or n_vars < 0:
            raise ValidationError(f"variable count must be a natural number, got {n_vars!r}")
        if n_vars > max_unknowns:
            raise SizeCapError(n_vars, max_unknowns)
        if sense not in ("min", "max"):
            raise ValidationError(f"sense must be 'min' or 'max', got {sense!r}")
        self.n_vars = n_vars
        self.eq = [(_as_row(a, n_vars), Fraction(b)) for a, b in eq]
        self.le = [(_as_row(a, n_vars), Fraction(b)) for a, b in le]
        self.objective = None if objective is None else _as_row(objective, n_vars)
        self.sense = sense

    def with_objective(self, objective, sense="min"):
        clone = LinearProgram.__new__(LinearProgram)
        clone.n_vars = self.n_vars
        clone.eq = self.eq
        clone.le = self.le
        clone.objective = _as_row(objective, self.n_vars)
        if sense not in ("min", "max"):
            raise ValidationError(f"sense must be 'min' or 'max', got {sense!r}")
        clone.sense = sense
        return clone

    def evaluate(self, x):
        if self.objective is None:
            return None
        return sum((c * x[j] for j, c in self.objective.items()), _ZERO)

    def satisfied_by(self, x):
        """Exact check of every constraint, including nonnegativity."""
        if len(x) != self.n_vars or any(v < 0 for v in x):
            return False
        nz = {j: v for j, v in enumerate(x) if v}

        def lhs(row):
            return sum((c * nz[j] for j, c in row.items() if j in nz), _ZERO)

        return (all(lhs(row) == rhs for row, rhs in self.eq)
                and all(lhs(row) <= rhs for row, rhs in self.le))


def _presolve(eq, le):
    """Fix to zero every unknown some row forces to zero.

    Returns ``(fixed, eq, le)`` with fixed columns removed from the rows, or
    ``None`` when a row is seen to be unsatisfiable.
    """
    fixed = set()
    eq = [(dict(r), b) for r, b in eq]
    le = [(dict(r), b) for r, b in le]
    changed = True
    while changed:
        changed = False
        new_fixed = set()
        kept_eq = []
        for row, rhs in eq:
            for j in [j for j in row if j in fixed]:
                del row[j]
            if not row:
                if rhs != 0:
                    return None
                continue
            pos = all(v > 0 for v in row.values())
            neg = all(v < 0 for v in row.values())
            if (pos or neg) and rhs == 0:
                new_fixed.update(row)
                continue
            if (pos and rhs < 0) or (neg and rhs > 0):
                return None
            kept_eq.append((row, rhs))
        kept_le = []
        for row, rhs in le:
            for j in [j for j in row if j in fixed]:
                del row[j]
            if not row:
                if rhs < 0:
                    return None
                continue
            if all(v > 0 for v in row.values()):
                if rhs < 0:
                    return None
                if rhs == 0:
                    new_fixed.update(row)
                    continue
            kept_le.append((row, rhs))
        eq, le = kept_eq, kept_le
        if new_fixed - fixed:
            fixed |= new_fixed
            changed = True
    return fixed, eq, le


class _Tableau:
    def __init__(self, rows, basis):
        self.rows = rows
        self.basis = basis

    def pivot(self, r, c, extra_rows=()):
        prow = self.rows[r]
        pv = prow[c]
        if pv != 1:
            prow = [v / pv if v else v for v in prow]
            self.rows[r] = prow
        nz = [(j, v) for j, v in enumerate(prow) if v]
        for row in [*self.rows[:r], *self.rows[r + 1:], *extra_rows]:
            f = row[c]
            if f:
                for j, v in nz:
                    row[j] -= f * v
        self.basis[r] = c

    def reduced_costs(self, cost):
        """Objective row for minimising ``cost`` given the current basis."""
        width = len(self.rows[0]) if self.rows else len(cost) + 1
        obj = list(cost) + [_ZERO] * (width - len(cost))
        for i, b in enumerate(self.basis):
            cb = cost[b] if b < len(cost) else _ZERO
            if cb:
                for j, v in enumerate(self.rows[i]):
                    if v:
                        obj[j] -= cb * v
        return obj

    def run(self, obj, n_allowed):
        """Bland's-rule simplex minimising the objective row in place.

        Returns False when the objective is unbounded below.
        """
        while True:
            enter = next((j for j in range(n_allowed) if obj[j] < 0), None)
            if enter is None:
                return True
            best = None
            best_ratio = None
            for i, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    ratio = row[-1] / a
                    if (best is None or ratio < best_ratio
                            or (ratio == best_ratio and self.basis[i] < self.basis[best])):
                        best, best_ratio = i, ratio
            if best is None:
                return False
            self.pivot(best, enter, extra_rows=(obj,))


def _solve(program, want_optimum):
    n = program.n_vars
    objective = program.objective if want_optimum else None
    if objective is not None and program.sense == "max":
        objective = {j: -v for j, v in objective.items()}

    pre = _presolve(program.eq, program.le)
    if pre is None:
        return LpOutcome(LpStatus.INFEASIBLE)
    fixed, eq, le = pre

    used = set()
    for row, _ in eq + le:
        used.update(row)
    if objective:
        used.update(j for j in objective if j not in fixed)
    active = sorted(used)
    col = {j: k for k, j in enumerate(active)}
    k = len(active)
    n_slack = len(le)
    m = len(eq) + len(le)

    # Columns: structural | slack | artificial | rhs
    needs_art = []
    raw = []
    for row, rhs in eq:
        sign = -1 if rhs < 0 else 1
        raw.append(({col[j]: sign * v for j, v in row.items()}, None, sign * rhs))
        needs_art.append(True)
    for s, (row, rhs) in enumerate(le):
        sign = -1 if rhs < 0 else 1
        raw.append(({col[j]: sign * v for j, v in row.items()}, (k + s, Fraction(sign)),
                    sign * rhs))
        needs_art.append(sign < 0)
    art_start = k + n_slack
    n_art = sum(needs_art)
    width = art_start + n_art + 1
    rows, basis = [], []
    a = art_start
    for (coefs, slack, rhs), art in zip(raw, needs_art):
        line = [_ZERO] * width
        for j, v in coefs.items():
            line[j] = Fraction(v)
        if slack is not None:
            line[slack[0]] = slack[1]
        line[-1] = Fraction(rhs)
        if art:
            line[a] = Fraction(1)
            basis.append(a)
            a += 1
        else:
            basis.append(slack[0])
        rows.append(line)
    tab = _Tableau(rows, basis)

    if n_art:
        cost = [_ZERO] * art_start + [Fraction(1)] * n_art
        obj = tab.reduced_costs(cost)
        tab.run(obj, width - 1)
        if obj[-1] != 0:
            return LpOutcome(LpStatus.INFEASIBLE)
        redundant = []
        for i, b in enumerate(tab.basis):
            if b >= art_start:
                j = next((j for j in range(art_start) if tab.rows[i][j]), None)
                if j is None:
                    redundant.append(i)
                else:
                    tab.pivot(i, j)
        for i in reversed(redundant):
            del tab.rows[i]
            del tab.basis[i]
        m -= len(redundant)

    value = None
    if objective is not None:
        cost = [_ZERO] * art_start
        for j, v in objective.items():
            if j not in fixed:
                cost[col[j]] = v
        obj = tab.reduced_costs(cost)
        if not tab.run(obj, art_start):
            return LpOutcome(LpStatus.UNBOUNDED)

    x = [_ZERO] * n
    for i, b in enumerate(tab.basis):
        if b < k:
            x[active[b]] = tab.rows[i][-1]
    x = tuple(x)
    if not program.satisfied_by(x):  # pragma: no cover - solver bug guard
        raise AssertionError("simplex produced a witness violating the program")
    if objective is None:
        return LpOutcome(LpStatus.FEASIBLE, witness=x)
    value = program.evaluate(x)
    return LpOutcome(LpStatus.OPTIMAL, witness=x, value=value)


def lp_feasible(program):
    """Decide feasibility; on success the outcome carries an exact witness."""
    return _solve(program, want_optimum=False)


def lp_optimize(program):
    """Optimise the program's objective in its stated direction."""
    if program.objective is None:
        raise ValidationError("lp_optimize needs a program with an objective")
    return _solve(program, want_optimum=True)
