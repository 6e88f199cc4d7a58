"""Coupling programs: contextuality decision, degree, fraction, uniqueness.

A system is noncontextual when its bunches admit a joint coupling in which
every pair of same-content cells coincides with the largest probability
their two distributions allow.  All of the questions below are linear
programs over the probabilities of *global outcomes*, one value per cell
of the content-context grid (empty cells fixed at ``NOMEAS``).
"""
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import prod

from .errors import DomainError, SizeCapError, ValidationError
from .lp import DEFAULT_MAX_UNKNOWNS, LinearProgram, LpStatus, lp_feasible, lp_optimize
from .rational import format_rational
from .system import NOMEAS, is_consistently_connected, is_strongly_consistently_connected


def max_equality_probability(d1, d2):
    """Largest P[A = B] over all couplings of two distributions.

    This is the sum of pointwise minima.  Both arguments map values to
    probabilities over the same support.
    """
    if set(d1) != set(d2):
        raise ValidationError(
            f"support mismatch: {sorted(d1)} vs {sorted(d2)}")
    return sum((min(d1[v], d2[v]) for v in d1), Fraction(0))


@dataclass(frozen=True)
class CouplingWitness:
    """A pmf over global outcomes; ``cells`` lists the ``(content, context)`` grid."""

    cells: tuple
    pmf: tuple

    def marginal(self, context, contents):
        idx = [self.cells.index((q, context)) for q in contents]
        out = defaultdict(Fraction)
        for g, p in self.pmf:
            out[tuple(g[i] for i in idx)] += p
        return dict(out)

    def equality_probability(self, content, c1, c2):
        i, j = self.cells.index((content, c1)), self.cells.index((content, c2))
        return sum((p for g, p in self.pmf if g[i] == g[j]), Fraction(0))

    def to_list(self):
        rows = []
        for g, p in self.pmf:
            by_ctx = {}
            for (q, c), v in zip(self.cells, g):
                by_ctx.setdefault(c, {})[q] = v
            rows.append({"cells": by_ctx, "p": format_rational(p)})
        return rows


@dataclass(frozen=True)
class NoncontextualityProgram:
    """Coupling LP with bookkeeping.

    Row 0 is normalization.  ``context_rows[k]`` names equality row
    ``1 + k`` as ``(context, bunch outcome)``; ``pair_rows[k]`` names the
    row after those as ``(content, context, context, max equality prob)``.
    Pair rows are written as ``P[cells differ] = 1 - max``, equivalent to
    ``P[cells equal] = max`` given normalization.
    """

    cells: tuple
    outcomes: tuple
    program: LinearProgram
    context_rows: tuple
    pair_rows: tuple

    def coupling(self, x):
        pmf = tuple((g, p) for g, p in zip(self.outcomes, x) if p)
        return CouplingWitness(self.cells, pmf)


def _cell_values(system):
    """Grid cells and, for each, the values it takes with positive probability."""
    cells, values = [], []
    for c in system.contexts:
        for q in system.contents:
            cells.append((q, c))
            if system.is_measured(q, c):
                dist = system.cell(q, c)
                values.append(tuple(v for v in system.supports[q] if dist[v]))
            else:
                values.append((NOMEAS,))
    return tuple(cells), values


def connection_pairs(system):
    """``(content, c, c')`` for every unordered pair of contexts measuring a content."""
    return [(q, c1, c2) for q in system.contents
            for c1, c2 in combinations(system.measuring_contexts(q), 2)]


def _build(system, with_pairs, max_outcomes):
    cells, values = _cell_values(system)
    size = prod(len(v) for v in values)
    if size > max_outcomes:
        raise SizeCapError(size, max_outcomes)
    pos = {cell: i for i, cell in enumerate(cells)}
    outcomes = tuple(product(*values))

    context_rows, rhs = [], []
    ctx_slots = []
    ctx_index = []
    for b in system.bunches:
        slots = [pos[(q, b.context)] for q in b.contents]
        index = {}
        for o in product(*(values[i] for i in slots)):
            index[o] = len(context_rows)
            context_rows.append((b.context, o))
            rhs.append(b.probability(o))
        ctx_slots.append(slots)
        ctx_index.append(index)
    rows = [dict() for _ in context_rows]

    pairs = connection_pairs(system)
    pair_info = []
    for q, c1, c2 in pairs:
        m = max_equality_probability(system.cell(q, c1), system.cell(q, c2))
        pair_info.append((q, c1, c2, m))
    pair_pos = [(pos[(q, c1)], pos[(q, c2)]) for q, c1, c2 in pairs]
    pair_rowdata = [dict() for _ in pairs]
    mismatches = []

    for gi, g in enumerate(outcomes):
        for slots, index in zip(ctx_slots, ctx_index):
            rows[index[tuple(g[i] for i in slots)]][gi] = 1
        n_diff = 0
        for k, (i, j) in enumerate(pair_pos):
            if g[i] != g[j]:
                n_diff += 1
                if with_pairs:
                    pair_rowdata[k][gi] = 1
        mismatches.append(n_diff)

    eq = [({gi: 1 for gi in range(len(outcomes))}, 1)]
    eq += list(zip(rows, rhs))
    if with_pairs:
        eq += [(r, 1 - m) for r, (_, _, _, m) in zip(pair_rowdata, pair_info)]
    program = LinearProgram(len(outcomes), eq=eq, max_unknowns=max_outcomes)
    nc = NoncontextualityProgram(cells, outcomes, program, tuple(context_rows),
                                 tuple(pair_info) if with_pairs else ())
    return nc, pair_info, mismatches


def build_noncontextuality_program(system, max_outcomes=DEFAULT_MAX_UNKNOWNS):
    """LP whose feasibility means: a coupling with multimaximal connections exists."""
    return _build(system, True, max_outcomes)[0]


def noncontextual_coupling(system, max_outcomes=DEFAULT_MAX_UNKNOWNS):
    """A coupling with multimaximal connections, or ``None`` if the system is contextual."""
    nc = build_noncontextuality_program(system, max_outcomes)
    out = lp_feasible(nc.program)
    if out.status is LpStatus.INFEASIBLE:
        return None
    return nc.coupling(out.witness)


def is_contextual(system, max_outcomes=DEFAULT_MAX_UNKNOWNS):
    return noncontextual_coupling(system, max_outcomes) is None


def cnt1(system, max_outcomes=DEFAULT_MAX_UNKNOWNS):
    """Smallest total shortfall from pairwise maximal equality over couplings.

    For each connection pair the shortfall is ``max P[equal] - P[equal]``;
    the sum is minimised over all couplings of the bunches.  Zero exactly
    when the system is noncontextual.
    """
    nc, pair_info, mismatches = _build(system, False, max_outcomes)
    program = nc.program.with_objective(dict(enumerate(mismatches)), "min")
    out = lp_optimize(program)
    # P[equal] = 1 - P[differ], so the shortfall is P[differ] - (1 - max).
    slack = sum((1 - m for *_, m in pair_info), Fraction(0))
    return out.value - slack


def _assignment_values(system):
    """Per content, values a global assignment may take, plus constrained slots."""
    values = {}
    constrained = {}
    for b in system.bunches:
        keep = []
        for q in b.contents:
            dist = system.cell(q, b.context)
            if dist[NOMEAS] == 1:
                continue
            keep.append(q)
            seen = values.setdefault(q, set())
            seen.update(v for v, p in dist.items() if p)
        constrained[b.context] = tuple(keep)
    ordered = {}
    for q in system.contents:
        vs = values.get(q)
        if not vs:
            ordered[q] = (NOMEAS,)
            continue
        # NOMEAS stays only where a present cell reads it with 0 < p < 1
        ordered[q] = tuple(v for v in system.supports[q] if v in vs)
    return ordered, constrained


def contextual_fraction(system, max_outcomes=DEFAULT_MAX_UNKNOWNS):
    """One minus the largest noncontextual mass the bunches can share.

    Only defined for consistently connected systems.  Global assignments
    give each content one measured value; cells reading ``NOMEAS`` with
    probability 1 constrain nothing.
    """
    cc = is_consistently_connected(system)
    if not cc:
        q, c1, c2 = cc.witness
        raise DomainError(
            f"not consistently connected: content {q!r} differs between "
            f"contexts {c1!r} and {c2!r}")
    values, constrained = _assignment_values(system)
    contents = system.contents
    size = prod(len(values[q]) for q in contents)
    if size > max_outcomes:
        raise SizeCapError(size, max_outcomes)
    assignments = list(product(*(values[q] for q in contents)))
    qpos = {q: i for i, q in enumerate(contents)}

    le = []
    for b in system.bunches:
        slots = constrained[b.context]
        if not slots:
            continue
        idx = [qpos[q] for q in slots]
        marg = b.marginal(slots)
        rows = defaultdict(dict)
        for gi, g in enumerate(assignments):
            rows[tuple(g[i] for i in idx)][gi] = 1
        for o in product(*(values[q] for q in slots)):
            le.append((rows.get(o, {}), marg.get(o, Fraction(0))))
    program = LinearProgram(len(assignments), le=le,
                            objective={gi: 1 for gi in range(len(assignments))},
                            sense="max", max_unknowns=max_outcomes)
    out = lp_optimize(program)
    return 1 - out.value


@dataclass(frozen=True)
class Uniqueness:
    unique: bool
    coupling: CouplingWitness

    def __bool__(self):
        return self.unique


def coupling_unique(system, max_outcomes=DEFAULT_MAX_UNKNOWNS):
    """Whether exactly one coupling has multimaximal connections.

    Every coordinate of the feasible polytope is minimised and maximised;
    the polytope is a point iff each pair of optima coincides.  The
    returned coupling is that point when unique, otherwise an arbitrary
    feasible one.
    """
    nc = build_noncontextuality_program(system, max_outcomes)
    first = lp_feasible(nc.program)
    if first.status is LpStatus.INFEASIBLE:
        raise DomainError("system is contextual")
    point = []
    for i in range(nc.program.n_vars):
        lo = lp_optimize(nc.program.with_objective({i: 1}, "min")).value
        hi = lp_optimize(nc.program.with_objective({i: 1}, "max")).value
        if lo != hi:
            return Uniqueness(False, nc.coupling(first.witness))
        point.append(lo)
    return Uniqueness(True, nc.coupling(point))


def analysis_report(system, max_outcomes=DEFAULT_MAX_UNKNOWNS, witness=False):
    """Everything the ``report`` command prints, as a JSON-ready dict."""
    coupling = noncontextual_coupling(system, max_outcomes)
    contextual = coupling is None
    cc = bool(is_consistently_connected(system))
    report = {
        "contextual": contextual,
        "cnt1": format_rational(cnt1(system, max_outcomes)),
        "contextual_fraction": (format_rational(contextual_fraction(system, max_outcomes))
                                if cc else None),
        "consistently_connected": cc,
        "strongly_consistently_connected": bool(is_strongly_consistently_connected(system)),
        "coupling_unique": None if contextual else coupling_unique(system, max_outcomes).unique,
    }
    if witness:
        report["witness"] = None if contextual else coupling.to_list()
    return report
