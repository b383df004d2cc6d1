"""Scenario harness: deterministic runs, exploration, trace persistence.

A scenario names its agents and a list of sessions. Each session runs a
script of phases between an initiator and a responder:

* ``keyDistribution``: initiator mails in the clear with their key
  attached, responder answers encrypted and signed with their own key
  attached. The responder's reply body is registered as a secret whenever
  it actually left encrypted.
* ``handshake``: both devices display their word lists and the users
  compare them out of band. Skipped unless both sides hold a key.
* ``greenExchange``: initiator sends a fresh secret, only if the peer is
  rated GREEN by then.

All wire messages pass through the adversary. The out-of-band comparison
does not: the attacker neither sees nor touches it. Runs are deterministic
functions of the config, including under exploration.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, replace
from pathlib import Path

from .adversary import (Adversary, Deliver, Drop, Explore, Inject,
                        Intervention, Knowledge, Passive, Replace,
                        ScriptedMitm, Strategy, enumerate_interventions)
from .engine import (NameSupply, PeerState, Rating, WireMessage,
                     complete_handshake)
from .events import Event, attacker_knows, parse_event_line, render_event_line
from .terms import AEnc, FreshName, Term, parse_term, render_term
from .trustwords import Dictionary, fixture_dictionary, load_dictionary

PHASE_KEY_DISTRIBUTION = "keyDistribution"
PHASE_HANDSHAKE = "handshake"
PHASE_GREEN_EXCHANGE = "greenExchange"
PHASES = (PHASE_KEY_DISTRIBUTION, PHASE_HANDSHAKE, PHASE_GREEN_EXCHANGE)

_AGENT_ID = re.compile(r"^[A-Za-z0-9_.-]+$")


class ConfigError(Exception):
    """Scenario configuration file or values are invalid."""


@dataclass(frozen=True)
class Bounds:
    max_interventions: int = 1
    max_term_depth: int = 2
    branch_cap: int = 100


@dataclass(frozen=True)
class SessionSpec:
    initiator: str
    responder: str
    script: tuple[str, ...]


@dataclass(frozen=True)
class ScenarioConfig:
    agents: tuple[str, ...]
    sessions: tuple[SessionSpec, ...]
    strategy: Strategy = Passive()
    dictionary_path: str = "fixture"
    seed: int = 0
    bounds: Bounds = Bounds()

    def validate(self) -> "ScenarioConfig":
        if not self.agents:
            raise ConfigError("no agents declared")
        for a in self.agents:
            if not _AGENT_ID.match(a):
                raise ConfigError(f"bad agent id {a!r}")
        if len(set(self.agents)) != len(self.agents):
            raise ConfigError("duplicate agent ids")
        for s in self.sessions:
            if s.initiator not in self.agents or s.responder not in self.agents:
                raise ConfigError(f"session references undeclared agent: {s}")
            if s.initiator == s.responder:
                raise ConfigError(f"session of {s.initiator} with itself")
            for phase in s.script:
                if phase not in PHASES:
                    raise ConfigError(f"unknown phase {phase!r}")
        if isinstance(self.strategy, ScriptedMitm):
            if (self.strategy.initiator not in self.agents
                    or self.strategy.responder not in self.agents):
                raise ConfigError("mitm strategy references undeclared agent")
        if self.bounds.branch_cap < 1:
            raise ConfigError("branch-cap must be at least 1")
        if self.bounds.max_interventions < 0 or self.bounds.max_term_depth < 0:
            raise ConfigError("bounds must be non-negative")
        return self


def strategy_label(strategy: Strategy, bounds: Bounds) -> str:
    if isinstance(strategy, Passive):
        return "passive"
    if isinstance(strategy, ScriptedMitm):
        return f"mitm:{strategy.initiator}:{strategy.responder}"
    return (f"explore:{strategy.max_interventions}:"
            f"{strategy.max_term_depth}:{bounds.branch_cap}")


def resolve_dictionary(cfg: ScenarioConfig) -> Dictionary:
    if cfg.dictionary_path == "fixture":
        return fixture_dictionary()
    return load_dictionary(cfg.dictionary_path)


# -- config file parsing ----------------------------------------------------

def parse_config(text: str) -> ScenarioConfig:
    """Parse the line-oriented ``key: value`` scenario format.

    ``session:`` lines repeat, one per session:
    ``session: alice -> bob : keyDistribution, handshake, greenExchange``.
    """
    agents: tuple[str, ...] = ()
    sessions: list[SessionSpec] = []
    strategy_spec: tuple[str, ...] = ("passive",)
    dictionary_path = "fixture"
    seed = 0
    bounds = Bounds()

    def intval(value: str, key: str, lineno: int) -> int:
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"line {lineno}: {key} needs an integer, got {value!r}")

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key: value', got {line!r}")
        key = key.strip().lower()
        value = value.strip()
        if key == "agents":
            agents = tuple(a.strip() for a in value.split(",") if a.strip())
        elif key == "seed":
            seed = intval(value, key, lineno)
        elif key == "dictionary":
            dictionary_path = value
        elif key == "strategy":
            strategy_spec = tuple(value.split())
            if not strategy_spec:
                raise ConfigError(f"line {lineno}: empty strategy")
        elif key == "max-interventions":
            bounds = replace(bounds, max_interventions=intval(value, key, lineno))
        elif key == "max-term-depth":
            bounds = replace(bounds, max_term_depth=intval(value, key, lineno))
        elif key == "branch-cap":
            bounds = replace(bounds, branch_cap=intval(value, key, lineno))
        elif key == "session":
            left, arrow, rest = value.partition("->")
            if not arrow:
                raise ConfigError(f"line {lineno}: session needs 'a -> b : phases'")
            pair, colon, phases_text = rest.partition(":")
            if not colon:
                raise ConfigError(f"line {lineno}: session needs ': phases'")
            phases = tuple(p for chunk in phases_text.split(",")
                           for p in chunk.split() if p)
            if not phases:
                raise ConfigError(f"line {lineno}: session without phases")
            sessions.append(SessionSpec(left.strip(), pair.strip(), phases))
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")

    kind = strategy_spec[0].lower()
    strategy: Strategy
    if kind == "passive" and len(strategy_spec) == 1:
        strategy = Passive()
    elif kind == "mitm" and len(strategy_spec) == 3:
        strategy = ScriptedMitm(strategy_spec[1], strategy_spec[2])
    elif kind == "explore" and len(strategy_spec) == 1:
        strategy = Explore(bounds.max_interventions, bounds.max_term_depth)
    else:
        raise ConfigError(f"bad strategy spec: {' '.join(strategy_spec)!r}")

    return ScenarioConfig(agents=agents, sessions=tuple(sessions),
                          strategy=strategy, dictionary_path=dictionary_path,
                          seed=seed, bounds=bounds).validate()


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


# -- traces ------------------------------------------------------------------

@dataclass(frozen=True)
class TraceRow:
    index: int
    session: int
    event: Event


@dataclass
class Trace:
    rows: list[TraceRow]
    secrets: list[Term]
    knowledge: Knowledge
    final_states: dict[str, PeerState]
    seed: int
    agents: tuple[str, ...]
    strategy_text: str
    branch: str = "-"

    def events(self) -> list[Event]:
        return [r.event for r in self.rows]


@dataclass
class LoadedTrace:
    """A persisted trace read back: events plus checker inputs."""

    rows: list[TraceRow]
    secrets: list[Term]
    knowledge: Knowledge
    branch: str = "-"

    def events(self) -> list[Event]:
        return [r.event for r in self.rows]


def render_trace(trace: Trace) -> str:
    lines = [
        "# format|1",
        f"# seed|{trace.seed}",
        f"# strategy|{trace.strategy_text}",
        f"# branch|{trace.branch}",
        f"# agents|{','.join(trace.agents)}",
    ]
    for s in trace.secrets:
        lines.append(f"# secret|{render_term(s)}")
    for r in sorted(render_term(t) for t in trace.knowledge.base):
        lines.append(f"# observed|{r}")
    for row in trace.rows:
        lines.append(render_event_line(row.index, row.session, row.event))
    return "\n".join(lines) + "\n"


def write_trace(trace: Trace, path: str | Path) -> None:
    Path(path).write_text(render_trace(trace), encoding="utf-8")


def load_trace(path: str | Path) -> LoadedTrace:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read trace {path}: {exc}") from exc
    rows: list[TraceRow] = []
    secrets: list[Term] = []
    knowledge = Knowledge(dictionary=None)
    branch = "-"
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            _, _, meta = line.partition("#")
            key, sep, value = meta.strip().partition("|")
            if key == "secret" and sep:
                secrets.append(parse_term(value))
            elif key == "observed" and sep:
                knowledge.learn(parse_term(value))
            elif key == "branch" and sep:
                branch = value
            continue
        index, session, event = parse_event_line(line)
        rows.append(TraceRow(index, session, event))
    return LoadedTrace(rows=rows, secrets=secrets, knowledge=knowledge,
                       branch=branch)


# -- execution ---------------------------------------------------------------

class _NeedChoice(Exception):
    """Run reached a decision point past the end of its plan."""

    def __init__(self, position: int):
        self.position = position


class _NoSuchChoice(Exception):
    """Plan asked for a candidate beyond the end of the stream."""


@dataclass
class _Run:
    cfg: ScenarioConfig
    dictionary: Dictionary
    strategy: Strategy
    plan: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        self.supply = NameSupply()
        self.adversary = Adversary(self.strategy, self.dictionary, self.supply)
        self.states: dict[str, PeerState] = {}
        self.rows: list[TraceRow] = []
        self.registry: list[Term] = []
        self.index = 0
        self.session_id = 0
        self.plan_pos = 0
        self.interventions_used = 0
        self.decision_count = 0

    # bookkeeping

    def record(self, event: Event) -> None:
        self.rows.append(TraceRow(self.index, self.session_id, event))
        self.index += 1

    def drain(self, state: PeerState) -> None:
        for event in state.drain_events():
            self.record(event)

    def agent(self, name: str) -> PeerState:
        state = self.states.get(name)
        if state is None:
            state = PeerState(name, self.supply)
            self.states[name] = state
            self.drain(state)
        return state

    # adversary-mediated transport

    def transmit(self, wire: WireMessage) -> None:
        self.adversary.observe(wire)
        action = self._decide(wire)
        if isinstance(action, Deliver):
            self._deliver(wire)
        elif isinstance(action, Drop):
            pass
        elif isinstance(action, Replace):
            self._deliver(WireMessage(wire.sender, wire.recipient, action.payload))
        elif isinstance(action, Inject):
            self._deliver(WireMessage(action.sender, action.recipient,
                                      action.payload))

    def _decide(self, wire: WireMessage) -> Intervention:
        if not isinstance(self.strategy, Explore):
            return self.adversary.intervene(wire, self.decision_count)
        if self.interventions_used >= self.strategy.max_interventions:
            return Deliver()
        position = self.plan_pos
        self.plan_pos += 1
        self.decision_count += 1
        assert self.plan is not None
        if position >= len(self.plan):
            raise _NeedChoice(position)
        action = self._candidate(wire, self.plan[position])
        if not isinstance(action, Deliver):
            self.interventions_used += 1
        return action

    def _candidate(self, wire: WireMessage, n: int) -> Intervention:
        stream = enumerate_interventions(self.adversary.knowledge, wire,
                                         self.strategy.max_term_depth)
        for i, action in enumerate(stream):
            if i == n:
                return action
        raise _NoSuchChoice()

    def _deliver(self, wire: WireMessage) -> None:
        state = self.agent(wire.recipient)
        state.receive(wire)
        self.drain(state)

    # phases

    def run(self) -> Trace:
        for sid, session in enumerate(self.cfg.sessions, start=1):
            self.session_id = sid
            initiator = self.agent(session.initiator)
            responder = self.agent(session.responder)
            for phase in session.script:
                if phase == PHASE_KEY_DISTRIBUTION:
                    self._key_distribution(initiator, responder)
                elif phase == PHASE_HANDSHAKE:
                    self._handshake(initiator, responder)
                elif phase == PHASE_GREEN_EXCHANGE:
                    self._green_exchange(initiator, responder)
        for secret in self.registry:
            if self.adversary.knowledge.derivable(secret):
                self.record(attacker_knows(secret))
        return Trace(rows=self.rows, secrets=list(self.registry),
                     knowledge=self.adversary.knowledge,
                     final_states=self.states, seed=self.cfg.seed,
                     agents=self.cfg.agents,
                     strategy_text=strategy_label(self.strategy, self.cfg.bounds),
                     branch="-" if self.plan is None else
                     ".".join(str(c) for c in self.plan) or "-")

    def _key_distribution(self, a: PeerState, b: PeerState) -> None:
        body = FreshName(self.supply.fresh("m"), a.self_id)
        self.transmit_composed(a, b.self_id, body, register=False)
        # The responder only answers if the opening message reached them.
        if a.self_id in b.peers:
            resp = FreshName(self.supply.fresh("resp"), b.self_id)
            self.transmit_composed(b, a.self_id, resp, register=True)

    def _handshake(self, a: PeerState, b: PeerState) -> None:
        if a.key_for(b.self_id) is None or b.key_for(a.self_id) is None:
            return
        a.start_handshake(b.self_id, self.dictionary)
        self.drain(a)
        b.start_handshake(a.self_id, self.dictionary)
        self.drain(b)
        # Out of band: the adversary neither observes nor touches this.
        _, ceremony_events = complete_handshake(a, b, self.dictionary)
        for event in ceremony_events:
            self.record(event)

    def _green_exchange(self, a: PeerState, b: PeerState) -> None:
        if a.rating_for(b.self_id) is not Rating.GREEN:
            return
        body = FreshName(self.supply.fresh("mssg"), a.self_id)
        self.transmit_composed(a, b.self_id, body, register=True)

    def transmit_composed(self, sender: PeerState, to: str, body: Term,
                          register: bool) -> None:
        wire = sender.compose(to, body)
        if register and isinstance(wire.payload, AEnc):
            # Only bodies that actually left encrypted count as secrets.
            self.registry.append(body)
        self.drain(sender)
        self.transmit(wire)


def run_scenario(cfg: ScenarioConfig) -> Trace:
    """Execute a passive or scripted scenario once."""
    cfg.validate()
    if isinstance(cfg.strategy, Explore):
        raise ConfigError("explore strategy produces many traces; "
                          "use explore_scenario")
    dictionary = resolve_dictionary(cfg)
    return _Run(cfg, dictionary, cfg.strategy).run()


def explore_scenario(cfg: ScenarioConfig) -> list[Trace]:
    """Enumerate intervention branches breadth-first, capped and fair.

    Decision points are wire transmissions while the intervention budget
    lasts. The frontier is serviced round-robin: each pending point yields
    its next candidate (Deliver, Drop, then synthesized replacements in
    order) before any point gets a second turn. The honest all-deliver
    branch is always emitted first. Everything is deterministic, so equal
    configs give byte-identical trace sets.
    """
    cfg.validate()
    strategy = (cfg.strategy if isinstance(cfg.strategy, Explore)
                else Explore(cfg.bounds.max_interventions,
                             cfg.bounds.max_term_depth))
    dictionary = resolve_dictionary(cfg)
    cap = cfg.bounds.branch_cap

    def attempt(plan: tuple[int, ...]):
        run = _Run(cfg, dictionary, strategy, plan=plan)
        try:
            return "trace", run.run()
        except _NeedChoice as need:
            return "need", need.position
        except _NoSuchChoice:
            return "exhausted", None

    traces: list[Trace] = []
    # Deliver everywhere until the run completes: branch zero is honest.
    honest_plan: tuple[int, ...] = ()
    while True:
        kind, result = attempt(honest_plan)
        if kind == "trace":
            traces.append(result)
            break
        honest_plan = honest_plan + (0,)
    if not honest_plan:
        return traces
    frontier: deque[tuple[tuple[int, ...], int]] = deque([((), 0)])
    while frontier and len(traces) < cap:
        prefix, next_child = frontier.popleft()
        plan = prefix + (next_child,)
        kind, result = attempt(plan)
        if kind == "exhausted":
            continue
        frontier.append((prefix, next_child + 1))
        if kind == "trace":
            if plan != honest_plan:
                traces.append(result)
        else:
            frontier.append((plan, 0))
    return traces
