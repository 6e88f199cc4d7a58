"""A small language for defining a connection as a function of others.

Surface syntax is a ``;``-separated list of guarded arms, tried in order,
ending in an ``otherwise`` arm::

    R1 if R4 = 1; -R1 if R4 = -1; NOMEAS otherwise

Arm values are a connection reference, a negated reference, a literal or
``NOMEAS``.  Guards combine atoms with ``and`` / ``or`` and parentheses::

    R = 1      R != 1      R is NOMEAS      R is not NOMEAS
    R < 2      R in {1, -1}

A reference to a connection that is not measured in the current context
reads ``NOMEAS``.  ``□`` is accepted as a spelling of ``NOMEAS``, and
``≠``/``∈`` as spellings of ``!=``/``in``.

Names resolve against the system's content ids.  When no content carries
the exact name, ``R<k>`` falls back to content ``q<k>``, so functions can
be written in the usual R-notation over systems whose contents are
labelled ``q0, q1, ...``.
"""
import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import EvaluationError, ValidationError
from .system import NOMEAS


class FunctionSyntaxError(ValidationError):
    def __init__(self, message, line, column):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


# -- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Ref:
    name: str


@dataclass(frozen=True)
class Neg:
    name: str


@dataclass(frozen=True)
class Lit:
    value: str


@dataclass(frozen=True)
class Compare:
    name: str
    op: str
    literal: str


@dataclass(frozen=True)
class IsNomeas:
    name: str
    negated: bool = False


@dataclass(frozen=True)
class InSet:
    name: str
    literals: tuple


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Or:
    parts: tuple


@dataclass(frozen=True)
class ConnectionFunction:
    clauses: tuple
    default: object

    def references(self):
        """Connection names used anywhere, in first-use order."""
        names = []

        def add(n):
            if n not in names:
                names.append(n)

        def walk_guard(g):
            if isinstance(g, (And, Or)):
                for p in g.parts:
                    walk_guard(p)
            else:
                add(g.name)

        def walk_value(v):
            if isinstance(v, (Ref, Neg)):
                add(v.name)

        for guard, value in self.clauses:
            walk_value(value)
            walk_guard(guard)
        walk_value(self.default)
        return tuple(names)

    def __str__(self):
        return format_function(self)


# -- lexer -----------------------------------------------------------------

KEYWORDS = {"if", "otherwise", "is", "not", "and", "or", "in", NOMEAS}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<num>[+-]?\d+(?:\.\d+)?(?:/\d+)?)
  | (?P<str>"[^"\n]*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op><=|>=|!=|[=<>;(){},\-]|≠|∈|□)
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text):
    toks = []
    i, line, col = 0, 1, 1
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            j = i
            while j < len(text) and not text[j].isspace() and not text[j].isalnum():
                j += 1
            raise FunctionSyntaxError(f"unknown operator {text[i:max(j, i + 1)]!r}", line, col)
        kind, chunk = m.lastgroup, m.group()
        if kind != "ws":
            if kind == "ident" and chunk in KEYWORDS:
                kind = "kw"
            if kind == "op" and chunk == "□":
                kind, chunk = "kw", NOMEAS
            toks.append(_Tok(kind, chunk, line, col))
        nl = chunk.count("\n")
        if nl:
            line += nl
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        i = m.end()
    toks.append(_Tok("eof", "", line, col))
    return toks


# -- parser ----------------------------------------------------------------

class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return FunctionSyntaxError(msg, tok.line, tok.col)

    def accept(self, kind, text=None):
        t = self.peek()
        if t.kind == kind and (text is None or t.text == text):
            self.i += 1
            return t
        return None

    def expect(self, kind, text=None, what=None):
        t = self.accept(kind, text)
        if t is None:
            got = self.peek().text or "end of input"
            raise self.error(f"expected {what or text or kind}, got {got!r}")
        return t

    def function(self):
        clauses = []
        while True:
            if self.peek().kind == "eof":
                raise self.error("missing 'otherwise' arm")
            value = self.value()
            if self.accept("kw", "otherwise"):
                default = value
                break
            self.expect("kw", "if", what="'if' or 'otherwise'")
            # the piecewise "VALUE if otherwise" spelling
            if self.accept("kw", "otherwise"):
                default = value
                break
            clauses.append((self.guard(), value))
            if not self.accept("op", ";"):
                raise self.error("missing 'otherwise' arm")
        self.accept("op", ";")
        if self.peek().kind != "eof":
            raise self.error("nothing may follow the 'otherwise' arm")
        return ConnectionFunction(tuple(clauses), default)

    def value(self):
        t = self.peek()
        if t.kind == "kw" and t.text == NOMEAS:
            self.next()
            return Lit(NOMEAS)
        if t.kind == "op" and t.text == "-":
            self.next()
            name = self.expect("ident", what="connection name after '-'")
            return Neg(name.text)
        if t.kind == "ident":
            self.next()
            return Ref(t.text)
        if t.kind in ("num", "str"):
            self.next()
            return Lit(_literal_text(t))
        raise self.error(f"expected a value, got {t.text or 'end of input'!r}")

    def guard(self):
        parts = [self.conj()]
        while self.accept("kw", "or"):
            parts.append(self.conj())
        return _flatten(Or, parts)

    def conj(self):
        parts = [self.atom()]
        while self.accept("kw", "and"):
            parts.append(self.atom())
        return _flatten(And, parts)

    def atom(self):
        if self.accept("op", "("):
            g = self.guard()
            self.expect("op", ")")
            return g
        name = self.expect("ident", what="connection name").text
        t = self.peek()
        if t.kind == "kw" and t.text == "is":
            self.next()
            negated = bool(self.accept("kw", "not"))
            self.expect("kw", NOMEAS)
            return IsNomeas(name, negated)
        if t.kind == "kw" and t.text == "in" or t.kind == "op" and t.text == "∈":
            self.next()
            self.expect("op", "{")
            lits = [self.literal()]
            while self.accept("op", ","):
                lits.append(self.literal())
            self.expect("op", "}")
            return InSet(name, tuple(lits))
        if t.kind == "op" and t.text in ("=", "!=", "≠"):
            self.next()
            op = "=" if t.text == "=" else "!="
            lit = self.literal()
            if lit == NOMEAS:
                return IsNomeas(name, negated=(op == "!="))
            return Compare(name, op, lit)
        if t.kind == "op" and t.text in ("<", "<=", ">", ">="):
            self.next()
            num = self.expect("num", what="numeric literal")
            return Compare(name, t.text, num.text)
        raise self.error(f"unknown operator {t.text or 'end of input'!r}")

    def literal(self):
        t = self.next()
        if t.kind in ("num", "str"):
            return _literal_text(t)
        if t.kind == "kw" and t.text == NOMEAS:
            return NOMEAS
        if t.kind == "ident":
            return t.text
        raise FunctionSyntaxError(f"expected a literal, got {t.text or 'end of input'!r}",
                                  t.line, t.col)


def _literal_text(tok):
    return tok.text[1:-1] if tok.kind == "str" else tok.text


def _flatten(cls, parts):
    if len(parts) == 1:
        return parts[0]
    flat = []
    for p in parts:
        flat.extend(p.parts if isinstance(p, cls) else (p,))
    return cls(tuple(flat))


def parse_function(text):
    """Parse function text into a :class:`ConnectionFunction`."""
    if not isinstance(text, str):
        raise ValidationError("function text must be a string")
    return _Parser(text).function()


def load_function(path):
    with open(path, encoding="utf-8") as fh:
        return parse_function(fh.read())


# -- pretty printer --------------------------------------------------------

_NUM_RE = re.compile(r"[+-]?\d+(?:\.\d+)?(?:/\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")


def _fmt_literal(v):
    if v == NOMEAS:
        return NOMEAS
    if _NUM_RE.fullmatch(v) or (_IDENT_RE.fullmatch(v) and v not in KEYWORDS):
        return v
    return f'"{v}"'


def _fmt_value(v):
    if isinstance(v, Ref):
        return v.name
    if isinstance(v, Neg):
        return f"-{v.name}"
    # bare identifiers in value position would read as references
    if _IDENT_RE.fullmatch(v.value) and v.value != NOMEAS:
        return f'"{v.value}"'
    return _fmt_literal(v.value)


def _fmt_guard(g, parent=None):
    if isinstance(g, (And, Or)):
        sep = " and " if isinstance(g, And) else " or "
        text = sep.join(_fmt_guard(p, type(g)) for p in g.parts)
        return f"({text})" if parent is And and isinstance(g, Or) else text
    if isinstance(g, IsNomeas):
        return f"{g.name} is {'not ' if g.negated else ''}NOMEAS"
    if isinstance(g, InSet):
        return f"{g.name} in {{{', '.join(_fmt_literal(v) for v in g.literals)}}}"
    lit = g.literal if g.op in ("<", "<=", ">", ">=") else _fmt_literal(g.literal)
    return f"{g.name} {g.op} {lit}"


def format_function(fn):
    """Canonical text; parsing it gives back an equal function."""
    arms = [f"{_fmt_value(v)} if {_fmt_guard(g)}" for g, v in fn.clauses]
    arms.append(f"{_fmt_value(fn.default)} otherwise")
    return "; ".join(arms)


# -- evaluation ------------------------------------------------------------

def _number(v):
    if v == NOMEAS:
        return None
    try:
        return Fraction(v)
    except (ValueError, ZeroDivisionError):
        return None


def same_value(a, b):
    """Value-string equality; numeric strings compare by value (``+1 == 1``)."""
    if a == b:
        return True
    x, y = _number(a), _number(b)
    return x is not None and y is not None and x == y


def _lookup(env, name):
    try:
        return env[name]
    except KeyError:
        raise EvaluationError(f"no value bound for connection {name!r}") from None


def _test(guard, env):
    if isinstance(guard, And):
        return all(_test(p, env) for p in guard.parts)
    if isinstance(guard, Or):
        return any(_test(p, env) for p in guard.parts)
    v = _lookup(env, guard.name)
    if isinstance(guard, IsNomeas):
        return (v == NOMEAS) != guard.negated
    if isinstance(guard, InSet):
        return any(same_value(v, lit) for lit in guard.literals)
    if guard.op == "=":
        return same_value(v, guard.literal)
    if guard.op == "!=":
        return not same_value(v, guard.literal)
    x, bound = _number(v), Fraction(guard.literal)
    if x is None:
        return False
    return {"<": x < bound, "<=": x <= bound, ">": x > bound, ">=": x >= bound}[guard.op]


def _value(expr, env):
    if isinstance(expr, Lit):
        return expr.value
    v = _lookup(env, expr.name)
    if isinstance(expr, Ref):
        return v
    if v == NOMEAS:
        raise EvaluationError(f"cannot negate {expr.name!r}: it reads NOMEAS")
    try:
        return str(-int(v))
    except ValueError:
        raise EvaluationError(f"cannot negate non-integer value {v!r} of {expr.name!r}") from None


def apply_function(fn, env):
    """Evaluate on one assignment ``{connection name: value}``; first matching arm wins."""
    for guard, value in fn.clauses:
        if _test(guard, env):
            return _value(value, env)
    return _value(fn.default, env)


def resolve_name(name, system):
    """Content id that a function-level name refers to in ``system``."""
    if name in system.supports:
        return name
    m = re.fullmatch(r"R(\w+)", name)
    if m and f"q{m.group(1)}" in system.supports:
        return f"q{m.group(1)}"
    raise ValidationError(f"function refers to unknown connection {name!r}")


def resolved_references(fn, system):
    return {n: resolve_name(n, system) for n in fn.references()}


@dataclass(frozen=True)
class CellSpec:
    """A new cell for one context, as a pointwise function of its bunch.

    ``values`` maps each positive-probability bunch outcome to the new
    value; ``distribution`` is the resulting pushforward.
    """

    context: str
    values: dict
    distribution: dict

    @property
    def is_empty(self):
        return self.distribution.get(NOMEAS, 0) == 1


def _env_for(bunch, outcome, names):
    here = dict(zip(bunch.contents, outcome))
    return {n: here.get(q, NOMEAS) for n, q in names.items()}


def evaluate_in_context(fn, system, context):
    names = resolved_references(fn, system)
    b = system.bunch(context)
    values, dist = {}, {}
    for outcome, p in b.pmf:
        v = apply_function(fn, _env_for(b, outcome, names))
        values[outcome] = v
        dist[v] = dist.get(v, Fraction(0)) + p
    return CellSpec(context, values, dist)


def satisfies_empty_propagation(fn, system, over="referenced"):
    """Whether the function outputs NOMEAS wherever an input reads NOMEAS.

    ``over="referenced"`` quantifies over the function's own arguments;
    ``over="all"`` over every connection of the system.
    """
    if over not in ("referenced", "all"):
        raise ValidationError("over must be 'referenced' or 'all'")
    names = resolved_references(fn, system)
    watched = set(names.values()) if over == "referenced" else set(system.contents)
    for b in system.bunches:
        for outcome, _ in b.pmf:
            here = dict(zip(b.contents, outcome))
            if any(here.get(q, NOMEAS) == NOMEAS for q in watched):
                try:
                    out = apply_function(fn, _env_for(b, outcome, names))
                except EvaluationError:
                    return False
                if out != NOMEAS:
                    return False
    return True
