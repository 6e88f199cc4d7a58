"""Rewrites of whole systems: adding and removing connections, checking a
functional relation between connections, and consistification."""
from dataclasses import dataclass
from fractions import Fraction
from math import prod

from .coupling import _cell_values
from .errors import EvaluationError, SizeCapError, ValidationError
from .funcdsl import (NOMEAS, apply_function, evaluate_in_context,
                      resolved_references, same_value)
from .lp import DEFAULT_MAX_UNKNOWNS
from .system import System


def _new_support(system, fn, produced):
    names = resolved_references(fn, system)
    order = []
    for q in names.values():
        for v in system.supports[q]:
            if v != NOMEAS and v in produced and v not in order:
                order.append(v)
    for v in produced:
        if v != NOMEAS and v not in order:
            order.append(v)
    return order


def add_connection(system, name, fn):
    """Append content ``name`` whose cell in each context is ``fn`` of the bunch.

    The new coordinate is a deterministic function of each bunch outcome.
    Contexts where it reads ``NOMEAS`` with probability 1 get an empty cell.
    """
    if not isinstance(name, str) or not name:
        raise ValidationError("connection name must be a non-empty string")
    if name in system.supports:
        raise ValidationError(f"content {name!r} already exists")
    specs = [evaluate_in_context(fn, system, c) for c in system.contexts]
    produced = []
    for spec in specs:
        for v in spec.values.values():
            if v not in produced:
                produced.append(v)
    bunches = []
    for b, spec in zip(system.bunches, specs):
        if spec.is_empty:
            bunches.append(b)
            continue
        pmf = {o + (spec.values[o],): p for o, p in b.pmf}
        bunches.append((b.context, b.contents + (name,), pmf))
    supports = dict(system.supports)
    supports[name] = _new_support(system, fn, produced)
    return System(system.contents + (name,), supports, bunches)


def remove_connection(system, content):
    """Drop a content; bunches are marginalized and emptied contexts dropped."""
    if content not in system.supports:
        raise ValidationError(f"unknown content {content!r}")
    keep = tuple(q for q in system.contents if q != content)
    if not keep:
        raise ValidationError("cannot remove the only content of a system")
    bunches = []
    for b in system.bunches:
        kept = tuple(q for q in b.contents if q != content)
        if kept:
            bunches.append((b.context, kept, b.marginal(kept)))
    if not bunches:
        raise ValidationError(f"removing {content!r} leaves no measured cells")
    return System(keep, {q: system.supports[q] for q in keep}, bunches)


def verify_function(system, target, fn):
    """Whether ``target`` equals ``fn`` of the other connections, context by context.

    Checked on every positive-probability bunch outcome; an empty target
    cell reads ``NOMEAS``.
    """
    if target not in system.supports:
        raise ValidationError(f"unknown content {target!r}")
    names = resolved_references(fn, system)
    for b in system.bunches:
        for outcome, _ in b.pmf:
            here = dict(zip(b.contents, outcome))
            env = {n: here.get(q, NOMEAS) for n, q in names.items()}
            try:
                got = apply_function(fn, env)
            except EvaluationError:
                return False
            if not same_value(got, here.get(target, NOMEAS)):
                return False
    return True


# -- consistification ------------------------------------------------------

def maximal_coupling(d1, d2, order):
    """Joint pmf of two distributions attaining ``P[equal] = sum of minima``.

    The diagonal gets ``min(d1(v), d2(v))``; the leftover mass is placed by
    the northwest-corner rule over ``order``.
    """
    joint = {}
    r1, r2 = {}, {}
    for v in order:
        m = min(d1[v], d2[v])
        if m:
            joint[(v, v)] = m
        r1[v], r2[v] = d1[v] - m, d2[v] - m
    i = j = 0
    while i < len(order) and j < len(order):
        a, b = order[i], order[j]
        if not r1[a]:
            i += 1
            continue
        if not r2[b]:
            j += 1
            continue
        m = min(r1[a], r2[b])
        joint[(a, b)] = joint.get((a, b), Fraction(0)) + m
        r1[a] -= m
        r2[b] -= m
    return joint


def cell_content_name(content, context):
    return f"{content}@{context}"


def pair_context_name(content, c1, c2):
    return f"K({content}|{c1},{c2})"


@dataclass(frozen=True)
class ConsistifiedNaming:
    """``cells`` maps ``(content, context)`` to the new content id;
    ``pairs`` maps ``(content, context, context)`` to the inserted context."""

    cells: dict
    pairs: dict

    def to_dict(self):
        return {
            "cells": [{"content": q, "context": c, "new_content": new}
                      for (q, c), new in self.cells.items()],
            "pairs": [{"content": q, "contexts": [c1, c2], "new_context": new}
                      for (q, c1, c2), new in self.pairs.items()],
        }


def consistify(system, max_outcomes=DEFAULT_MAX_UNKNOWNS):
    """Rewrite into a strongly consistently connected, contextually equivalent system.

    Every measured cell ``(q, c)`` becomes its own content ``q@c``, measured
    in context ``c`` with the original bunch.  For each pair of contexts
    sharing ``q`` a context ``K(q|c,c')`` is inserted, measuring
    ``q@c`` and ``q@c'`` with their original marginals, maximally coupled.
    Original contexts come first, then inserted ones by content and pair.
    Raises :class:`SizeCapError` when the result's coupling program would
    exceed ``max_outcomes`` unknowns.
    """
    cells, pairs = {}, {}
    contents, supports = [], {}
    for c in system.contexts:
        for q in system.bunch(c).contents:
            new = cell_content_name(q, c)
            if new in cells.values():
                raise ValidationError(f"consistified name clash on {new!r}")
            cells[(q, c)] = new
    for (q, c), new in cells.items():
        contents.append(new)
        supports[new] = system.supports[q]

    bunches = []
    for b in system.bunches:
        renamed = tuple(cells[(q, b.context)] for q in b.contents)
        bunches.append((b.context, renamed, b.as_dict()))
    taken = set(system.contexts)
    for q in system.contents:
        ctxs = system.measuring_contexts(q)
        for i, c1 in enumerate(ctxs):
            for c2 in ctxs[i + 1:]:
                name = pair_context_name(q, c1, c2)
                if name in taken:
                    raise ValidationError(f"inserted context name {name!r} already in use")
                taken.add(name)
                pairs[(q, c1, c2)] = name
                d1, d2 = system.cell(q, c1), system.cell(q, c2)
                joint = maximal_coupling(d1, d2, system.supports[q])
                bunches.append((name, (cells[(q, c1)], cells[(q, c2)]), joint))
    if not contents:
        raise ValidationError("system has no measured cells to consistify")
    result = System(contents, supports, bunches)
    _, values = _cell_values(result)
    size = prod(len(v) for v in values)
    if size > max_outcomes:
        raise SizeCapError(size, max_outcomes)
    return result, ConsistifiedNaming(cells, pairs)
