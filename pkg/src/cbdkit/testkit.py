"""Worked-example catalog, random generators and an independent oracle.

The catalog ids name systems, functions and couplings from the standard
X/Y/Z walk-through: ``X``, ``Y``, ``Z`` are stochastically unrelated fair
``±1`` variables, one per context.  ``paper_example("eq9")`` returns a
:class:`~cbdkit.system.System`; ids ending in ``-coupling`` return a
:class:`~cbdkit.coupling.CouplingWitness`; ``eq10-f``, ``eq15-g``,
``eq20-phi``, ``eq25-g``, ``eq26-h`` and ``eq28-f`` return parsed
functions.

The oracle here decides noncontextuality of consistently connected systems
by Gaussian elimination followed by Fourier-Motzkin elimination.  It never
touches :mod:`cbdkit.lp`, so it can be used to cross-check the simplex path.
"""
import random
from fractions import Fraction
from itertools import product

from .coupling import CouplingWitness
from .errors import DomainError, ValidationError
from .funcdsl import (ConnectionFunction, Compare, InSet, IsNomeas, Lit, Neg, Or,
                      Ref, parse_function)
from .system import NOMEAS, System, fill_deterministic, is_consistently_connected
from .transforms import consistify

PM = ["1", "-1"]


def _x(lat):
    return lat[0]


def _neg_x(lat):
    return -lat[0]


def _v(lat):
    return lat[1]


def _fair_context(name, cells, n_latent=1):
    """Context whose cells are functions of ``n_latent`` independent fair ±1 latents."""
    pmf = {}
    for lat in product((1, -1), repeat=n_latent):
        outcome = tuple(str(f(lat)) if callable(f) else f for f in cells.values())
        pmf[outcome] = pmf.get(outcome, Fraction(0)) + Fraction(1, 2 ** n_latent)
    return (name, tuple(cells), pmf)


def _system(contents, rows, supports=None):
    sup = {q: PM for q in contents}
    sup.update(supports or {})
    return System(contents, sup, rows)


# -- systems ---------------------------------------------------------------

def _eq1():
    f = Fraction
    return System(["q1", "q2", "q3"], {q: PM for q in ["q1", "q2", "q3"]}, [
        ("c1", ("q1", "q2"), {("1", "1"): f(1, 2), ("1", "-1"): f(1, 8),
                              ("-1", "1"): f(1, 8), ("-1", "-1"): f(1, 4)}),
        ("c2", ("q2", "q3"), {("1", "1"): f(3, 8), ("1", "-1"): f(1, 4),
                              ("-1", "1"): f(1, 8), ("-1", "-1"): f(1, 4)}),
        ("c3", ("q1", "q3"), {("1", "1"): f(1, 4), ("1", "-1"): f(1, 4),
                              ("-1", "1"): f(1, 4), ("-1", "-1"): f(1, 4)}),
    ])


def _eq6():
    return _system(["q1", "q2", "q3"], [
        _fair_context("c1", {"q1": _x, "q2": _x}),
        _fair_context("c2", {"q2": _x, "q3": _x}),
        _fair_context("c3", {"q1": _x, "q3": _x}),
    ])


def _eq8():
    return _system(["q1", "q2", "q3", "q4"], [
        _fair_context("c1", {"q1": _x, "q2": _x, "q4": "1"}),
        _fair_context("c2", {"q2": _x, "q3": _x}),
        _fair_context("c3", {"q1": _x, "q3": _x, "q4": "-1"}),
    ])


def _eq9():
    return _system(["q0", "q1", "q2", "q3", "q4"], [
        _fair_context("c1", {"q0": _x, "q1": _x, "q2": _x, "q4": "1"}),
        _fair_context("c2", {"q2": _x, "q3": _x}),
        _fair_context("c3", {"q0": _neg_x, "q1": _x, "q3": _x, "q4": "-1"}),
    ])


def _eq11():
    return _system(["q0", "q2", "q3"], [
        _fair_context("c1", {"q0": _x, "q2": _x}),
        _fair_context("c2", {"q2": _x, "q3": _x}),
        _fair_context("c3", {"q0": _neg_x, "q3": _x}),
    ])


def _eq14(indicator_support=("1",)):
    ind = list(indicator_support)
    return _system(["q1", "q2", "q3", "q4", "q5"], [
        _fair_context("c1", {"q1": _x, "q2": _x, "q4": "1"}),
        _fair_context("c2", {"q2": _x, "q3": _x}),
        _fair_context("c3", {"q1": _x, "q3": _x, "q5": "1"}),
    ], supports={"q4": ind, "q5": ind})


def _eq16():
    return _system(["q0", "q1", "q2", "q3", "q4", "q5"], [
        _fair_context("c1", {"q0": _x, "q1": _x, "q2": _x, "q4": "1"}),
        _fair_context("c2", {"q2": _x, "q3": _x}),
        _fair_context("c3", {"q0": _neg_x, "q1": _x, "q3": _x, "q5": "1"}),
    ], supports={"q4": ["1"], "q5": ["1"]})


def _eq17():
    return _system(["q0", "q1"], [
        _fair_context("c1", {"q0": _x, "q1": _x}),
        _fair_context("c3", {"q0": _neg_x, "q1": _x}),
    ])


def _eq19():
    return _system(["q1", "q2"], [
        _fair_context("c1", {"q1": _x, "q2": _x}),
        _fair_context("c2", {"q2": _x}),
        _fair_context("c3", {"q1": _x}),
    ])


def _eq21():
    return _system(["q0", "q1", "q2"], [
        _fair_context("c1", {"q1": _x, "q2": _x}),
        _fair_context("c2", {"q0": _x, "q2": _x}),
        _fair_context("c3", {"q0": _neg_x, "q1": _x}),
    ])


def _chain3():
    return _system(["q0", "q2", "q3", "q4", "q5"], [
        _fair_context("c1", {"q0": _x, "q2": _x, "q4": "1"}),
        _fair_context("c2", {"q2": _x, "q3": _x}),
        _fair_context("c3", {"q0": _neg_x, "q3": _x, "q5": "1"}),
    ], supports={"q4": ["1"], "q5": ["1"]})


def _eq27(copy):
    second = _x if copy else _v
    n = 1 if copy else 2
    return _system(["q1", "q2", "q3", "q4", "q5"], [
        _fair_context("c1", {"q1": _x, "q2": _x, "q4": second}, n),
        _fair_context("c2", {"q2": _x, "q3": _x}),
        _fair_context("c3", {"q1": _x, "q3": _x, "q5": second}, n),
    ])


def system_a(marginals=None, both_one=None):
    """Cyclic rank-3 system of six arbitrary dichotomous cells.

    ``marginals`` gives ``P[cell = 1]`` for the cells
    ``(q1,c1), (q2,c1), (q2,c2), (q3,c2), (q3,c3), (q1,c3)``;
    ``both_one`` gives ``P[both cells = 1]`` in ``c1, c2, c3``.  Defaults
    are fair marginals with perfect correlation in ``c1`` and ``c2`` and
    perfect anticorrelation in ``c3``.
    """
    h = Fraction(1, 2)
    marginals = [Fraction(m) for m in (marginals or [h] * 6)]
    both_one = [Fraction(p) for p in (both_one or [h, h, Fraction(0)])]
    if len(marginals) != 6 or len(both_one) != 3:
        raise ValidationError("system_a needs 6 marginals and 3 joint parameters")
    pairs = [("c1", ("q1", "q2"), marginals[0], marginals[1]),
             ("c2", ("q2", "q3"), marginals[2], marginals[3]),
             ("c3", ("q3", "q1"), marginals[4], marginals[5])]
    rows = []
    for (name, qs, a, b), p11 in zip(pairs, both_one):
        if not (0 <= a <= 1 and 0 <= b <= 1 and max(0, a + b - 1) <= p11 <= min(a, b)):
            raise ValidationError(f"invalid parameters for context {name}: "
                                  f"P[1]={a}, P[1]={b}, P[1,1]={p11}")
        rows.append((name, qs, {("1", "1"): p11, ("1", "-1"): a - p11,
                                ("-1", "1"): b - p11, ("-1", "-1"): 1 - a - b + p11}))
    return _system(["q1", "q2", "q3"], rows)


def _coupling(system, rows):
    """Coupling driven by one fair latent S; ``rows`` maps context -> {content: fn}."""
    cells = tuple((q, c) for c in system.contexts for q in system.contents)
    pmf = []
    for s in (1, -1):
        g = []
        for q, c in cells:
            f = rows[c].get(q)
            g.append(NOMEAS if f is None else (str(f((s,))) if callable(f) else f))
        pmf.append((tuple(g), Fraction(1, 2)))
    return CouplingWitness(cells, tuple(pmf))


_FUNCTIONS = {
    "eq10-f": "R1 if R4 = 1; -R1 if R4 = -1; NOMEAS otherwise",
    "eq15-g": "R1 if R4 = 1; -R1 if R5 = 1; NOMEAS otherwise",
    "eq20-phi": "R2 if R1 is NOMEAS; -R1 if R2 is NOMEAS; NOMEAS otherwise",
    "eq25-g": "R1 if R4 = 1; -R1 if R5 = 1; NOMEAS otherwise",
    "eq26-h": "R0 if R4 = 1; -R0 if R5 = 1; NOMEAS otherwise",
    "eq28-f": "R1 if R4 = 1 or R4 = -1; -R1 if R5 = 1 or R5 = -1; NOMEAS otherwise",
}

_SYSTEMS = {
    "eq1": _eq1,
    "eq2": lambda: fill_deterministic(_eq1()),
    "eq6": _eq6,
    "eq8": _eq8,
    "eq9": _eq9,
    "eq11-pr3": _eq11,
    "eq14": _eq14,
    "eq16": _eq16,
    "eq17-sub": _eq17,
    "eq19": _eq19,
    "eq21": _eq21,
    "chain-1": _eq6,
    "chain-2": _eq14,
    "chain-3": _chain3,
    "eq27-indep": lambda: _eq27(copy=False),
    "eq27-copy": lambda: _eq27(copy=True),
}

EXAMPLE_IDS = tuple(sorted([*_SYSTEMS, *_FUNCTIONS, "eq7-coupling", "eq12-coupling",
                            "sysA", "sysB-of-sysA"]))


def paper_example(example_id, **params):
    """Build a catalog entry.

    ``sysA`` and ``sysB-of-sysA`` accept the keyword arguments of
    :func:`system_a`; ``eq14``/``chain-2`` accept ``indicator_support``.
    """
    if example_id in ("sysA", "sysB-of-sysA"):
        a = system_a(**params)
        return a if example_id == "sysA" else consistify(a)[0]
    if params and example_id not in ("eq14", "chain-2"):
        raise ValidationError(f"example {example_id!r} takes no parameters")
    if example_id in _SYSTEMS:
        return _SYSTEMS[example_id](**params)
    if example_id in _FUNCTIONS:
        return parse_function(_FUNCTIONS[example_id])
    if example_id == "eq7-coupling":
        return _coupling(_eq6(), {"c1": {"q1": _x, "q2": _x}, "c2": {"q2": _x, "q3": _x},
                                  "c3": {"q1": _x, "q3": _x}})
    if example_id == "eq12-coupling":
        return _coupling(_eq8(), {"c1": {"q1": _x, "q2": _x, "q4": "1"},
                                  "c2": {"q2": _x, "q3": _x},
                                  "c3": {"q1": _x, "q3": _x, "q4": "-1"}})
    raise ValidationError(f"unknown example id {example_id!r}; known: {', '.join(EXAMPLE_IDS)}")


# -- random generators -----------------------------------------------------

def _random_pair(rng, a, b, den):
    """Joint of two ±1 cells with P[1] = a/den, b/den, on the den-grid."""
    lo, hi = max(0, a + b - den), min(a, b)
    p11 = rng.randint(lo, hi)
    return {("1", "1"): Fraction(p11, den), ("1", "-1"): Fraction(a - p11, den),
            ("-1", "1"): Fraction(b - p11, den),
            ("-1", "-1"): Fraction(den - a - b + p11, den)}


def random_cyclic_system(rank, consistent, seed, denominator=64):
    """Dichotomous cyclic system: context ``ci`` measures ``qi`` and ``q(i+1 mod n)``.

    Probabilities are multiples of ``1/denominator``.  With ``consistent``
    every content keeps one marginal across its two contexts.
    """
    if rank < 2:
        raise ValidationError("cyclic rank must be at least 2")
    rng = random.Random(seed)
    contents = [f"q{i + 1}" for i in range(rank)]
    shared = [rng.randint(0, denominator) for _ in contents]
    rows = []
    for i in range(rank):
        j = (i + 1) % rank
        if consistent:
            a, b = shared[i], shared[j]
        else:
            a, b = rng.randint(0, denominator), rng.randint(0, denominator)
        rows.append((f"c{i + 1}", (contents[i], contents[j]), _random_pair(rng, a, b, denominator)))
    return System(contents, {q: PM for q in contents}, rows)


def random_connection_function(contents, rng, max_refs=2, propagate=True):
    """A random piecewise function over some of ``contents``.

    With ``propagate`` a leading arm maps to NOMEAS whenever any referenced
    connection reads NOMEAS, so the function satisfies empty propagation.
    """
    refs = rng.sample(list(contents), rng.randint(1, min(max_refs, len(contents))))

    def value():
        kind = rng.choice(["ref", "neg", "lit", "lit"])
        if kind == "ref":
            return Ref(rng.choice(refs))
        if kind == "neg":
            return Neg(rng.choice(refs))
        return Lit(rng.choice(PM))

    def guard():
        q = rng.choice(refs)
        kind = rng.choice(["eq", "ne", "in"])
        if kind == "eq":
            return Compare(q, "=", rng.choice(PM))
        if kind == "ne":
            return Compare(q, "!=", rng.choice(PM))
        return InSet(q, tuple(rng.sample(PM, rng.randint(1, 2))))

    clauses = [(guard(), value()) for _ in range(rng.randint(1, 3))]
    default = rng.choice([Lit(NOMEAS), value()])
    fn = ConnectionFunction(tuple(clauses), default)
    if propagate:
        used = fn.references()
        blank = [IsNomeas(q) for q in used]
        lead = blank[0] if len(blank) == 1 else Or(tuple(blank))
        fn = ConnectionFunction(((lead, Lit(NOMEAS)),) + fn.clauses, fn.default)
    return fn


# -- elimination oracle ----------------------------------------------------

def _rref_nonneg_feasible(rows, n):
    """Does ``A x = b, x >= 0`` have a solution?  ``rows`` are ``[a_0..a_{n-1}, b]``."""
    rows = [list(r) for r in rows]
    pivots = []
    r = 0
    for col in range(n):
        k = next((i for i in range(r, len(rows)) if rows[i][col]), None)
        if k is None:
            continue
        rows[r], rows[k] = rows[k], rows[r]
        pv = rows[r][col]
        rows[r] = [v / pv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [u - f * w for u, w in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
    for row in rows[r:]:
        if row[-1] != 0:
            return False
    free = [c for c in range(n) if c not in pivots]
    # x_pivot = b - sum(a_f t_f) >= 0  and  t_f >= 0
    ineqs = []
    for i, col in enumerate(pivots):
        ineqs.append(({f: rows[i][f] for f in free if rows[i][f]}, rows[i][-1]))
    for f in free:
        ineqs.append(({f: Fraction(-1)}, Fraction(0)))
    return _fourier_motzkin(ineqs, free)


def _normalize(coefs, bound):
    scale = max(abs(v) for v in coefs.values())
    return (tuple(sorted((k, v / scale) for k, v in coefs.items())), bound / scale)


def _fourier_motzkin(ineqs, variables):
    """Feasibility of ``sum(a_k t_k) <= b`` over the reals by eliminating each variable."""
    current = {}
    for coefs, b in ineqs:
        # Fractions throughout: int / int would silently go to float
        coefs = {k: Fraction(v) for k, v in coefs.items() if v}
        b = Fraction(b)
        if not coefs:
            if b < 0:
                return False
            continue
        key, bound = _normalize(coefs, b)
        current[key] = min(bound, current.get(key, bound))
    for var in variables:
        pos, neg, rest = [], [], {}
        for key, b in current.items():
            coefs = dict(key)
            a = coefs.get(var, 0)
            if a > 0:
                pos.append((coefs, b, a))
            elif a < 0:
                neg.append((coefs, b, a))
            else:
                rest[key] = b
        for cp, bp, ap in pos:
            for cn, bn, an in neg:
                merged = {}
                for k in set(cp) | set(cn):
                    if k == var:
                        continue
                    v = cp.get(k, 0) / ap + cn.get(k, 0) / -an
                    if v:
                        merged[k] = v
                bound = bp / ap + bn / -an
                if not merged:
                    if bound < 0:
                        return False
                    continue
                key, nb = _normalize(merged, bound)
                rest[key] = min(nb, rest.get(key, nb))
        current = rest
    return all(b >= 0 for b in current.values())


def deterministic_assignment_oracle(system):
    """Noncontextuality of a consistently connected system, decided without the LP solver.

    True iff the bunches are a mixture of deterministic global assignments
    (one value per content, restricted to each context).
    """
    cc = is_consistently_connected(system)
    if not cc:
        raise DomainError(f"oracle needs a consistently connected system; witness {cc.witness}")
    values, slots_of = {}, {}
    for b in system.bunches:
        keep = []
        for q in b.contents:
            dist = system.cell(q, b.context)
            if dist[NOMEAS] == 1:
                continue
            keep.append(q)
            values.setdefault(q, set()).update(v for v, p in dist.items() if p)
        slots_of[b.context] = keep
    domain = [sorted(values.get(q, {NOMEAS})) for q in system.contents]
    assignments = list(product(*domain))
    n = len(assignments)
    index = {q: i for i, q in enumerate(system.contents)}
    rows = [[Fraction(1)] * n + [Fraction(1)]]
    for b in system.bunches:
        slots = slots_of[b.context]
        if not slots:
            continue
        marg = b.marginal(slots)
        for o in product(*(domain[index[q]] for q in slots)):
            line = [Fraction(int(all(g[index[q]] == v for q, v in zip(slots, o))))
                    for g in assignments]
            rows.append(line + [marg.get(o, Fraction(0))])
    # outcomes outside the assignment domain (none for CC systems) must carry no mass
    for b in system.bunches:
        slots = slots_of[b.context]
        for o, p in b.marginal(slots).items():
            if any(v not in domain[index[q]] for q, v in zip(slots, o)) and p:
                return False
    return _rref_nonneg_feasible(rows, n)
