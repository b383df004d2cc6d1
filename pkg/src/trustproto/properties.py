"""Trace properties: correspondence queries and secrecy checks.

A correspondence query says: whenever the trigger event occurs, the listed
conditions must hold with consistent variable bindings. Positive conditions
look strictly earlier in the trace; negated ones are checked against the
whole trace. A query may be injective, in which case distinct trigger
occurrences must map to distinct protocol runs (Lowe-style agreement).

A pass with zero trigger occurrences is a vacuous pass and is reported as
such, never silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

from . import events as ev
from .adversary import Knowledge
from .events import EVENT_SIGNATURES, Event
from .terms import AEnc, Pair, PubKey, Sign, Term, render_term


class QueryError(Exception):
    """Query is malformed, e.g. uses a variable before anything binds it."""


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class PPair:
    left: "TermPattern"
    right: "TermPattern"


@dataclass(frozen=True)
class PAEnc:
    plaintext: "TermPattern"
    key: "TermPattern"


@dataclass(frozen=True)
class PSign:
    message: "TermPattern"
    key: "TermPattern"


@dataclass(frozen=True)
class PPub:
    of: "TermPattern"


TermPattern = Union[Var, Term, PPair, PAEnc, PSign, PPub]
ArgPattern = Union[Var, str, Term, PPair, PAEnc, PSign, PPub]
Binding = dict[str, Union[str, Term]]


@dataclass(frozen=True)
class EventPattern:
    name: str
    args: tuple[ArgPattern, ...]

    def __post_init__(self):
        sig = EVENT_SIGNATURES.get(self.name)
        if sig is None or len(sig) != len(self.args):
            raise QueryError(f"bad event pattern {self.name}/{len(self.args)}")


def match_value(pattern: ArgPattern, value, binding: Binding) -> Binding | None:
    """Structural match; returns the extended binding or None."""
    if isinstance(pattern, Var):
        if pattern.name in binding:
            return binding if binding[pattern.name] == value else None
        out = dict(binding)
        out[pattern.name] = value
        return out
    if isinstance(pattern, str):
        return binding if value == pattern else None
    if isinstance(pattern, Term):
        return binding if value == pattern else None
    if isinstance(pattern, PPair):
        if not isinstance(value, Pair):
            return None
        b = match_value(pattern.left, value.left, binding)
        return match_value(pattern.right, value.right, b) if b is not None else None
    if isinstance(pattern, PAEnc):
        if not isinstance(value, AEnc):
            return None
        b = match_value(pattern.plaintext, value.plaintext, binding)
        return match_value(pattern.key, value.key, b) if b is not None else None
    if isinstance(pattern, PSign):
        if not isinstance(value, Sign):
            return None
        b = match_value(pattern.message, value.message, binding)
        return match_value(pattern.key, value.key, b) if b is not None else None
    if isinstance(pattern, PPub):
        if not isinstance(value, PubKey):
            return None
        return match_value(pattern.of, value.of, binding)
    raise QueryError(f"unsupported pattern {pattern!r}")


def match_event(pattern: EventPattern, event: Event,
                binding: Binding) -> Binding | None:
    if event.name != pattern.name:
        return None
    current = binding
    for pat, arg in zip(pattern.args, event.args):
        current = match_value(pat, arg, current)
        if current is None:
            return None
    return current


@dataclass(frozen=True)
class Prior:
    """The pattern must match some strictly earlier event."""

    pattern: EventPattern
    run_scoped: bool = False


@dataclass(frozen=True)
class Never:
    """The pattern must match nowhere in the entire trace."""

    pattern: EventPattern


@dataclass(frozen=True)
class Shape:
    """The term bound to ``var`` must match the term pattern."""

    var: str
    pattern: TermPattern


@dataclass(frozen=True)
class NotEqual:
    a: ArgPattern
    b: ArgPattern


@dataclass(frozen=True)
class AnyOf:
    """One level of disjunction over clause sequences."""

    arms: tuple[tuple["Clause", ...], ...]


Clause = Union[Prior, Never, Shape, NotEqual, AnyOf]


@dataclass(frozen=True)
class Query:
    name: str
    trigger: EventPattern
    clauses: tuple[Clause, ...]
    injective: bool = False

    def __post_init__(self):
        bound = _pattern_vars(self.trigger.args)
        _validate_clauses(self.clauses, set(bound), self.name)


def _pattern_vars(patterns) -> set[str]:
    out: set[str] = set()
    stack = list(patterns)
    while stack:
        p = stack.pop()
        if isinstance(p, Var):
            out.add(p.name)
        elif isinstance(p, PPair):
            stack += [p.left, p.right]
        elif isinstance(p, PAEnc):
            stack += [p.plaintext, p.key]
        elif isinstance(p, PSign):
            stack += [p.message, p.key]
        elif isinstance(p, PPub):
            stack.append(p.of)
    return out


def _validate_clauses(clauses, bound: set[str], name: str) -> set[str]:
    for clause in clauses:
        if isinstance(clause, Prior):
            bound |= _pattern_vars(clause.pattern.args)
        elif isinstance(clause, Never):
            loose = _pattern_vars(clause.pattern.args) - bound
            if loose:
                raise QueryError(f"{name}: negation binds nothing, "
                                 f"unbound {sorted(loose)}")
        elif isinstance(clause, Shape):
            if clause.var not in bound:
                raise QueryError(f"{name}: shape on unbound var {clause.var!r}")
            bound |= _pattern_vars([clause.pattern])
        elif isinstance(clause, NotEqual):
            loose = _pattern_vars([clause.a, clause.b]) - bound
            if loose:
                raise QueryError(f"{name}: comparison of unbound {sorted(loose)}")
        elif isinstance(clause, AnyOf):
            arm_bounds = [_validate_clauses(arm, set(bound), name)
                          for arm in clause.arms]
            # Only variables bound in every arm survive the disjunction.
            bound = set.intersection(*arm_bounds) if arm_bounds else bound
        else:
            raise QueryError(f"{name}: unknown clause {clause!r}")
    return bound


def _resolve(pattern: ArgPattern, binding: Binding):
    if isinstance(pattern, Var):
        return binding[pattern.name]
    return pattern


def _solve(rows: Sequence[Event], trigger_index: int,
           clauses: Sequence[Clause], binding: Binding,
           runs: tuple[int, ...]) -> Iterator[tuple[Binding, tuple[int, ...]]]:
    """Yield all (binding, run-indices) completions, deterministically."""
    if not clauses:
        yield binding, runs
        return
    head, rest = clauses[0], clauses[1:]
    if isinstance(head, Prior):
        for j in range(trigger_index):
            extended = match_event(head.pattern, rows[j], binding)
            if extended is not None:
                next_runs = runs + (j,) if head.run_scoped else runs
                yield from _solve(rows, trigger_index, rest, extended, next_runs)
    elif isinstance(head, Never):
        if any(match_event(head.pattern, row, binding) is not None
               for row in rows):
            return
        yield from _solve(rows, trigger_index, rest, binding, runs)
    elif isinstance(head, Shape):
        extended = match_value(head.pattern, binding[head.var], binding)
        if extended is not None:
            yield from _solve(rows, trigger_index, rest, extended, runs)
    elif isinstance(head, NotEqual):
        if _resolve(head.a, binding) != _resolve(head.b, binding):
            yield from _solve(rows, trigger_index, rest, binding, runs)
    elif isinstance(head, AnyOf):
        for arm in head.arms:
            yield from _solve(rows, trigger_index, tuple(arm) + rest,
                              binding, runs)
    else:
        raise QueryError(f"unknown clause {head!r}")


@dataclass
class Verdict:
    query: str
    passed: bool
    vacuous: bool
    triggers: int
    witnesses: list[str] = field(default_factory=list)


def _describe_event(i: int, event: Event) -> str:
    rendered = [render_term(a) if isinstance(a, Term) else a for a in event.args]
    return f"{event.name}({', '.join(rendered)}) at index {i}"


def check_correspondence(rows: Sequence[Event], query: Query) -> Verdict:
    triggers: list[tuple[int, Binding]] = []
    for i, row in enumerate(rows):
        binding = match_event(query.trigger, row, {})
        if binding is not None:
            triggers.append((i, binding))
    used: set[tuple[int, ...]] = set()
    witnesses: list[str] = []
    passed = True
    for i, binding in triggers:
        chosen: tuple[int, ...] | None = None
        seen_any = False
        for _, runs in _solve(rows, i, query.clauses, binding, ()):
            seen_any = True
            if not query.injective or runs not in used:
                chosen = runs
                break
        if chosen is None:
            passed = False
            why = ("no unused run left (injectivity)" if seen_any
                   else "conditions unmet")
            witnesses.append(f"{_describe_event(i, rows[i])}: {why}")
        elif query.injective:
            used.add(chosen)
    return Verdict(query=query.name, passed=passed, vacuous=not triggers,
                   triggers=len(triggers), witnesses=witnesses)


# -- the six properties ------------------------------------------------------

FULL_AGREEMENT = "full-agreement"
TRUST_BY_HANDSHAKE = "trust-by-handshake"
PRIVACY_FROM_TRUSTED = "privacy-from-trusted"
INTEGRITY_FROM_TRUSTED = "integrity-from-trusted"
MITM_DETECTION = "mitm-detection"
CONFIDENTIALITY = "confidentiality"

PROPERTY_NAMES = (FULL_AGREEMENT, TRUST_BY_HANDSHAKE, PRIVACY_FROM_TRUSTED,
                  INTEGRITY_FROM_TRUSTED, MITM_DETECTION, CONFIDENTIALITY)


def _full_agreement_queries() -> list[Query]:
    a, b = Var("a"), Var("b")
    trigger = EventPattern(ev.END_HANDSHAKE_OK,
                           (a, b, Var("pka"), Var("pkb"), Var("ea"), Var("eb")))
    clauses: tuple[Clause, ...] = (
        Prior(EventPattern(ev.START_HANDSHAKE, (a, b)), run_scoped=True),
        Prior(EventPattern(ev.START_HANDSHAKE, (b, a)), run_scoped=True),
        Prior(EventPattern(ev.USER_KEY, (a, Var("pka")))),
        Prior(EventPattern(ev.USER_KEY, (b, Var("pkb")))),
        Prior(EventPattern(ev.USER_EMAIL, (a, Var("ea")))),
        Prior(EventPattern(ev.USER_EMAIL, (b, Var("eb")))),
    )
    return [Query(FULL_AGREEMENT, trigger, clauses, injective=True)]


def _trust_by_handshake_queries() -> list[Query]:
    b, a = Var("b"), Var("a")
    trigger = EventPattern(ev.RECEIVE_GREEN, (b, a, Var("m")))
    return [Query(TRUST_BY_HANDSHAKE, trigger,
                  (Prior(EventPattern(ev.RECEIVER_TRUSTS, (b, a))),))]


def _privacy_queries() -> list[Query]:
    b, a, z = Var("b"), Var("a"), Var("z")
    green = Query(
        PRIVACY_FROM_TRUSTED + "/green",
        EventPattern(ev.RECEIVE_GREEN, (b, a, z)),
        (
            Prior(EventPattern(ev.SEND_GREEN, (a, b, z))),
            Shape("z", PAEnc(Var("m"), Var("pkb"))),
            Prior(EventPattern(ev.USER_KEY, (b, Var("pkb")))),
        ))
    failed = Query(
        PRIVACY_FROM_TRUSTED + "/undecryptable",
        EventPattern(ev.DECRYPTION_FAILS, (b, a, Var("m"))),
        (Never(EventPattern(ev.SEND_GREEN, (a, b, Var("m")))),))
    return [green, failed]


def _integrity_queries() -> list[Query]:
    b, a, z = Var("b"), Var("a"), Var("z")
    green = Query(
        INTEGRITY_FROM_TRUSTED + "/green",
        EventPattern(ev.RECEIVE_GREEN, (b, a, z)),
        (
            Prior(EventPattern(ev.SEND_GREEN, (a, b, z))),
            Shape("z", PAEnc(PSign(Var("m"), Var("ska")), Var("kb"))),
            Prior(EventPattern(ev.USER_KEY, (a, PPub(Var("ska"))))),
        ))
    failed = Query(
        INTEGRITY_FROM_TRUSTED + "/unverifiable",
        EventPattern(ev.SIGN_VERIF_FAILS, (b, a, Var("m"))),
        (Never(EventPattern(ev.SEND_GREEN, (a, b, Var("m")))),))
    return [green, failed]


def _mitm_detection_queries() -> list[Query]:
    a, b = Var("a"), Var("b")
    trigger = EventPattern(ev.END_HANDSHAKE_UNSUCC, (a, b, Var("ka"), Var("kb")))
    either = AnyOf((
        (Prior(EventPattern(ev.USER_KEY, (a, Var("pka")))),
         NotEqual(Var("pka"), Var("ka"))),
        (Prior(EventPattern(ev.USER_KEY, (b, Var("pkb")))),
         NotEqual(Var("pkb"), Var("kb"))),
    ))
    return [Query(MITM_DETECTION, trigger, (either,))]


_QUERY_BUILDERS = {
    FULL_AGREEMENT: _full_agreement_queries,
    TRUST_BY_HANDSHAKE: _trust_by_handshake_queries,
    PRIVACY_FROM_TRUSTED: _privacy_queries,
    INTEGRITY_FROM_TRUSTED: _integrity_queries,
    MITM_DETECTION: _mitm_detection_queries,
}


@dataclass
class PropertyReport:
    name: str
    passed: bool
    vacuous: bool
    details: list[str] = field(default_factory=list)

    def status(self) -> str:
        if not self.passed:
            return "FAIL"
        return "PASS (vacuous)" if self.vacuous else "PASS"


def check_confidentiality(knowledge: Knowledge,
                          secrets: Sequence[Term]) -> PropertyReport:
    """No registered secret may be derivable from the final knowledge."""
    details: list[str] = []
    passed = True
    for secret in secrets:
        derivation = knowledge.derive(secret)
        if derivation is not None:
            passed = False
            details.append(f"attacker derives {render_term(secret)}:")
            details.extend(derivation.pretty(indent=1).splitlines())
    return PropertyReport(CONFIDENTIALITY, passed=passed,
                          vacuous=not secrets, details=details)


def check_property(name: str, rows: Sequence[Event],
                   knowledge: Knowledge | None = None,
                   secrets: Sequence[Term] = ()) -> PropertyReport:
    if name == CONFIDENTIALITY:
        if knowledge is None:
            raise QueryError("confidentiality needs the attacker knowledge")
        return check_confidentiality(knowledge, secrets)
    builder = _QUERY_BUILDERS.get(name)
    if builder is None:
        raise QueryError(f"unknown property {name!r}")
    verdicts = [check_correspondence(rows, q) for q in builder()]
    details: list[str] = []
    for v in verdicts:
        suffix = " (vacuous)" if v.vacuous else f" ({v.triggers} triggers)"
        details.append(f"{v.query}: {'ok' if v.passed else 'violated'}{suffix}")
        details.extend(f"  {w}" for w in v.witnesses)
    return PropertyReport(name, passed=all(v.passed for v in verdicts),
                          vacuous=all(v.vacuous for v in verdicts),
                          details=details)


def check_all(rows: Sequence[Event], knowledge: Knowledge,
              secrets: Sequence[Term]) -> list[PropertyReport]:
    return [check_property(name, rows, knowledge, secrets)
            for name in PROPERTY_NAMES]
