"""Content-context systems of random variables.

A :class:`System` is a grid of contents (columns) by contexts (rows).  Each
context carries a *bunch*: a joint pmf over the contents it measures.  A
content missing from a bunch is an empty cell.  The reserved value
:data:`NOMEAS` stands for "no measurement output" and belongs to every
support, so a cell that reads ``NOMEAS`` with probability 1 is the
deterministic stand-in for an empty one.

Systems are immutable; every operation here returns a new one.
"""
import json
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .errors import ValidationError
from .rational import format_rational, parse_rational

NOMEAS = "NOMEAS"

_ONE = Fraction(1)


def _check_name(kind, name):
    if not isinstance(name, str) or not name:
        raise ValidationError(f"{kind} id must be a non-empty string, got {name!r}")
    return name


def _value_token(v):
    if isinstance(v, bool) or not isinstance(v, (str, int)):
        raise ValidationError(f"value must be a string, got {v!r}")
    v = str(v)
    if not v:
        raise ValidationError("empty value string")
    return v


@dataclass(frozen=True)
class Bunch:
    """Joint distribution of the contents measured in one context.

    ``pmf`` holds only positive entries, ordered canonically by the
    owning system's supports.
    """

    context: str
    contents: tuple
    pmf: tuple

    def as_dict(self):
        return dict(self.pmf)

    def marginal(self, contents):
        """Joint pmf of a subset of this bunch's contents (in the given order)."""
        idx = [self.contents.index(q) for q in contents]
        out = defaultdict(Fraction)
        for outcome, p in self.pmf:
            out[tuple(outcome[i] for i in idx)] += p
        return dict(out)

    def probability(self, outcome):
        for o, p in self.pmf:
            if o == outcome:
                return p
        return Fraction(0)


@dataclass(frozen=True)
class Check:
    """Result of a yes/no property check, with a witness when it fails."""

    holds: bool
    witness: tuple = None

    def __bool__(self):
        return self.holds


@dataclass(frozen=True)
class Connection:
    """All cells sharing one content; ``None`` marks an empty cell."""

    content: str
    contexts: tuple
    entries: tuple


class System:
    """An immutable content-context system.

    Parameters
    ----------
    contents : sequence of str
        Content ids, in display order.
    supports : mapping
        Declared values per content.  Missing contents get an empty
        declaration; values seen in the pmfs are appended in order of first
        appearance and ``NOMEAS`` is always last.
    bunches : iterable
        ``(context, measured_contents, pmf)`` triples or :class:`Bunch`
        objects, where ``pmf`` maps value tuples to probabilities.
    """

    __slots__ = ("contents", "supports", "bunches", "_by_context")

    def __init__(self, contents, supports, bunches):
        contents = tuple(_check_name("content", q) for q in contents)
        if len(set(contents)) != len(contents):
            raise ValidationError(f"duplicate content id in {list(contents)}")
        cpos = {q: i for i, q in enumerate(contents)}
        supports = dict(supports or {})
        for q in supports:
            if q not in cpos:
                raise ValidationError(f"support declared for unknown content {q!r}")

        staged = []
        seen_ctx = set()
        for b in bunches:
            if isinstance(b, Bunch):
                name, measured, pmf = b.context, b.contents, b.as_dict()
            else:
                name, measured, pmf = b
            name = _check_name("context", name)
            if name in seen_ctx:
                raise ValidationError(f"duplicate context id {name!r}")
            seen_ctx.add(name)
            measured = tuple(measured)
            if len(set(measured)) != len(measured):
                raise ValidationError(f"context {name!r} measures a content twice")
            for q in measured:
                if q not in cpos:
                    raise ValidationError(f"context {name!r} measures unknown content {q!r}")
            staged.append((name, measured, pmf))
        if not staged:
            raise ValidationError("a system needs at least one context")

        # Equalized supports: declared order, then newly seen values, NOMEAS last.
        order = {}
        for q in contents:
            declared = []
            for v in supports.get(q, ()):
                v = _value_token(v)
                if v in declared:
                    raise ValidationError(f"duplicate value {v!r} in support of {q!r}")
                if v != NOMEAS:
                    declared.append(v)
            order[q] = declared
        for name, measured, pmf in staged:
            for outcome in pmf:
                if len(outcome) != len(measured):
                    raise ValidationError(
                        f"context {name!r}: outcome {outcome!r} has arity {len(outcome)}, "
                        f"expected {len(measured)}")
                for q, v in zip(measured, outcome):
                    v = _value_token(v)
                    if v != NOMEAS and v not in order[q]:
                        order[q].append(v)
        self.supports = {q: tuple(order[q]) + (NOMEAS,) for q in contents}
        self.contents = contents

        vpos = {q: {v: i for i, v in enumerate(s)} for q, s in self.supports.items()}
        built = []
        for name, measured, pmf in staged:
            perm = sorted(range(len(measured)), key=lambda i: cpos[measured[i]])
            slots = tuple(measured[i] for i in perm)
            entries = defaultdict(Fraction)
            total = Fraction(0)
            for outcome, p in pmf.items():
                p = parse_rational(p)
                if p < 0:
                    raise ValidationError(f"context {name!r}: negative probability {p}")
                total += p
                if p:
                    key = tuple(_value_token(outcome[i]) for i in perm)
                    entries[key] += p
            if total != 1:
                raise ValidationError(
                    f"context {name!r}: pmf not normalized (sums to {format_rational(total)})")
            ordered = sorted(entries.items(),
                             key=lambda kv: tuple(vpos[q][v] for q, v in zip(slots, kv[0])))
            built.append(Bunch(name, slots, tuple(ordered)))
        self.bunches = tuple(built)
        self._by_context = {b.context: b for b in self.bunches}

    # -- structure ---------------------------------------------------------

    @property
    def contexts(self):
        return tuple(b.context for b in self.bunches)

    def bunch(self, context):
        try:
            return self._by_context[context]
        except KeyError:
            raise ValidationError(f"unknown context {context!r}") from None

    def is_measured(self, content, context):
        """Whether the cell is present in its bunch (it may still read NOMEAS)."""
        return content in self.bunch(context).contents

    def cell(self, content, context):
        """Distribution of the cell over the content's full support."""
        if content not in self.supports:
            raise ValidationError(f"unknown content {content!r}")
        dist = {v: Fraction(0) for v in self.supports[content]}
        b = self.bunch(context)
        if content not in b.contents:
            dist[NOMEAS] = _ONE
            return dist
        for (v,), p in b.marginal([content]).items():
            dist[v] += p
        return dist

    def is_nomeas_cell(self, content, context):
        """True for empty cells and for present cells with P[NOMEAS] = 1."""
        return self.cell(content, context)[NOMEAS] == 1

    def connection(self, content):
        entries = tuple(self.cell(content, c) if self.is_measured(content, c) else None
                        for c in self.contexts)
        return Connection(content, self.contexts, entries)

    def measuring_contexts(self, content):
        return tuple(b.context for b in self.bunches if content in b.contents)

    def permuted(self, contents=None, contexts=None):
        """Same system with contents and/or contexts listed in another order."""
        contents = tuple(self.contents if contents is None else contents)
        contexts = tuple(self.contexts if contexts is None else contexts)
        if sorted(contents) != sorted(self.contents) or sorted(contexts) != sorted(self.contexts):
            raise ValidationError("permuted() needs a reordering of the existing ids")
        return System(contents, self.supports, [self.bunch(c) for c in contexts])

    # -- value semantics ---------------------------------------------------

    def _key(self):
        return (self.contents, tuple(self.supports[q] for q in self.contents), self.bunches)

    def __eq__(self, other):
        if not isinstance(other, System):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return (f"System(contents={list(self.contents)}, "
                f"contexts={list(self.contexts)})")

    def to_dict(self):
        return {
            "contents": list(self.contents),
            "supports": {q: [v for v in self.supports[q] if v != NOMEAS]
                         for q in self.contents},
            "contexts": [
                {
                    "name": b.context,
                    "measures": list(b.contents),
                    "pmf": [{"outcome": dict(zip(b.contents, o)), "p": format_rational(p)}
                            for o, p in b.pmf],
                }
                for b in self.bunches
            ],
        }


# -- file format ----------------------------------------------------------

_TOP_KEYS = {"contents", "supports", "contexts"}
_CONTEXT_KEYS = {"name", "measures", "pmf"}


def validate_system(raw):
    """Build a :class:`System` from a parsed system-file document."""
    if not isinstance(raw, dict):
        raise ValidationError("system document must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ValidationError(f"unknown top-level keys: {sorted(unknown)}")
    for key in ("contents", "contexts"):
        if key not in raw:
            raise ValidationError(f"missing top-level key {key!r}")
    contents = raw["contents"]
    if not isinstance(contents, list):
        raise ValidationError("'contents' must be a list")
    supports = raw.get("supports", {})
    if not isinstance(supports, dict) or not all(isinstance(v, list) for v in supports.values()):
        raise ValidationError("'supports' must map content ids to lists of values")
    contexts = raw["contexts"]
    if not isinstance(contexts, list):
        raise ValidationError("'contexts' must be a list")
    bunches = []
    for ctx in contexts:
        if not isinstance(ctx, dict):
            raise ValidationError("each context must be an object")
        extra = set(ctx) - _CONTEXT_KEYS
        if extra:
            raise ValidationError(f"unknown context keys: {sorted(extra)}")
        name = ctx.get("name")
        measures = ctx.get("measures")
        if not isinstance(measures, list):
            raise ValidationError(f"context {name!r}: 'measures' must be a list")
        pmf_items = ctx.get("pmf")
        if not isinstance(pmf_items, list):
            raise ValidationError(f"context {name!r}: 'pmf' must be a list")
        pmf = {}
        for item in pmf_items:
            if not isinstance(item, dict) or set(item) != {"outcome", "p"}:
                raise ValidationError(f"context {name!r}: pmf entries need exactly 'outcome' and 'p'")
            outcome = item["outcome"]
            if not isinstance(outcome, dict) or set(outcome) != set(measures) \
                    or len(outcome) != len(measures):
                raise ValidationError(
                    f"context {name!r}: outcome {outcome!r} does not match measures {measures}")
            key = tuple(_value_token(outcome[q]) for q in measures)
            if key in pmf:
                raise ValidationError(f"context {name!r}: outcome {outcome!r} listed twice")
            pmf[key] = parse_rational(item["p"])
        bunches.append((name, measures, pmf))
    return System(contents, supports, bunches)


def loads_system(text):
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}") from None
    return validate_system(raw)


def load_system(path):
    with open(path, encoding="utf-8") as fh:
        return loads_system(fh.read())


def dumps_system(system):
    return json.dumps(system.to_dict(), indent=2, ensure_ascii=False) + "\n"


def save_system(system, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_system(system))


# -- connectedness ---------------------------------------------------------

def is_consistently_connected(system):
    """All measured cells of each content share one distribution.

    Empty cells are skipped; cells that are present but read ``NOMEAS``
    are compared like any other.  The witness on failure is
    ``(content, context, context)``.
    """
    for q in system.contents:
        ctxs = system.measuring_contexts(q)
        if not ctxs:
            continue
        ref = system.cell(q, ctxs[0])
        for c in ctxs[1:]:
            if system.cell(q, c) != ref:
                return Check(False, (q, ctxs[0], c))
    return Check(True)


def is_strongly_consistently_connected(system):
    """Jointly measured contents have the same joint law in every context pair.

    Comparing on the full intersection of two contexts covers every subset
    of it.  The witness is ``(contents, (context, context))``.
    """
    for b1, b2 in combinations(system.bunches, 2):
        shared = tuple(q for q in b1.contents if q in b2.contents)
        if shared and b1.marginal(shared) != b2.marginal(shared):
            return Check(False, (shared, (b1.context, b2.context)))
    return Check(True)


# -- deterministic cells ---------------------------------------------------

def fill_deterministic(system):
    """Put a deterministic ``NOMEAS`` cell into every empty slot."""
    bunches = []
    for b in system.bunches:
        missing = [q for q in system.contents if q not in b.contents]
        if not missing:
            bunches.append(b)
            continue
        measured = b.contents + tuple(missing)
        pad = (NOMEAS,) * len(missing)
        bunches.append((b.context, measured, {o + pad: p for o, p in b.pmf}))
    return System(system.contents, system.supports, bunches)


def strip_deterministic(system):
    """Turn every cell with P[NOMEAS] = 1 into an empty cell."""
    bunches = []
    for b in system.bunches:
        keep = tuple(q for q in b.contents if not system.is_nomeas_cell(q, b.context))
        if keep == b.contents:
            bunches.append(b)
        else:
            bunches.append((b.context, keep, b.marginal(keep)))
    return System(system.contents, system.supports, bunches)


def subsystem(system, contents=None, contexts=None):
    """Restrict to some contents and contexts.

    Bunches are marginalized onto the kept contents; contexts left with no
    measured content are dropped.
    """
    contents = system.contents if contents is None else tuple(contents)
    contexts = system.contexts if contexts is None else tuple(contexts)
    if not contents or not contexts:
        raise ValidationError("subsystem selection must be non-empty")
    for q in contents:
        if q not in system.supports:
            raise ValidationError(f"unknown content {q!r}")
    for c in contexts:
        system.bunch(c)
    keep_q = [q for q in system.contents if q in set(contents)]
    bunches = []
    for b in system.bunches:
        if b.context not in contexts:
            continue
        kept = tuple(q for q in b.contents if q in keep_q)
        if kept:
            bunches.append((b.context, kept, b.marginal(kept)))
    if not bunches:
        raise ValidationError("subsystem selection leaves no measured cells")
    return System(keep_q, {q: system.supports[q] for q in keep_q}, bunches)
