"""Correlated action selection over pre-shared entangled pairs.

Two agents hold opposite halves of n shared pairs.  At action time each
measures every held qubit in the common basis and reads off an n-bit string;
with clean channels both strings are identical, and their big-endian integer
value picks one strike out of 2**n.  No classical message is exchanged at
action time.

Strike identities are compartmentalized: each agent receives an action table
from its own issuing chain (carl issues to alice, dave to bob) mapping bit
values to opaque action tokens.  Tokens carry no strike information, so one
captured table plus the bits still leaves every strike label possible; only
headquarters' strike set resolves the selected number to a label.

Convention: slot/pair index 0 contributes the most significant bit of the
action number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from . import qsim
from .qsim import PureState
from .seeding import SplitMix64, derive_seed

_MASK64 = (1 << 64) - 1

#: RunRecord strike value when the two bit strings disagree.
AMBIGUOUS = "ambiguous"

_CANONICAL_AGENTS = ("alice", "bob")
_CANONICAL_ISSUERS = ("carl", "dave")
_ISSUER_FOR = {"alice": "carl", "bob": "dave"}


# ---------------------------------------------------------------------- types


class _GeneratedLabels(Sequence):
    """Placeholder labels "strike-<hex>", materialized on demand.

    Key-agreement regimes run the protocol with n_bits large enough that an
    explicit tuple of 2**n_bits labels cannot exist; these are distinct by
    construction, so StrikeSet skips the enumeration check.
    """

    __slots__ = ("n_bits", "_size", "_fmt")

    def __init__(self, n_bits: int) -> None:
        self.n_bits = n_bits
        self._size = 1 << n_bits  # may exceed what __len__ can report
        self._fmt = ("strike-%0" + str(max(1, (n_bits + 3) // 4)) + "x").__mod__

    def __len__(self) -> int:
        return self._size

    def __getitem__(self, index):
        if isinstance(index, slice):
            return [self[i] for i in range(*index.indices(self._size))]
        if not 0 <= index < self._size:
            raise IndexError(index)
        return self._fmt(index)

    def __eq__(self, other) -> bool:
        if isinstance(other, _GeneratedLabels):
            return self.n_bits == other.n_bits
        return NotImplemented

    def __hash__(self) -> int:
        return hash(("_GeneratedLabels", self.n_bits))


@dataclass(frozen=True)
class StrikeSet:
    """The 2**n_bits strike labels, indexed by action number."""

    n_bits: int
    labels: Sequence[str]

    def __post_init__(self) -> None:
        if self.n_bits < 1:
            raise ValueError("n_bits must be at least 1")
        if isinstance(self.labels, _GeneratedLabels):
            if self.labels.n_bits != self.n_bits:
                raise ValueError("generated labels sized for a different n_bits")
            return
        if len(self.labels) != 1 << self.n_bits:
            raise ValueError(
                f"need {1 << self.n_bits} labels for {self.n_bits} bits, got {len(self.labels)}"
            )
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("strike labels must be distinct")


@dataclass(frozen=True)
class ActionTable:
    """Per-agent mapping from (slot, bit) to an opaque action token."""

    agent: str
    issuer: str
    entries: tuple[tuple[str, str], ...]  # entries[slot] = (token if 0, token if 1)

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("an action table needs at least one slot")
        expected = _ISSUER_FOR.get(self.agent)
        if expected is not None and self.issuer != expected:
            raise ValueError(f"agent {self.agent!r} must be issued by {expected!r}")
        flat = [tok for pair in self.entries for tok in pair]
        if len(set(flat)) != len(flat):
            raise ValueError("action tokens must be distinct within a table")

    @property
    def n_bits(self) -> int:
        return len(self.entries)

    @classmethod
    def _trusted(cls, agent: str, issuer: str, entries: tuple) -> "ActionTable":
        # Internal fast path: token distinctness and issuer pairing are
        # guaranteed by the issuing code, so skip __post_init__ checks.
        table = object.__new__(cls)
        object.__setattr__(table, "agent", agent)
        object.__setattr__(table, "issuer", issuer)
        object.__setattr__(table, "entries", entries)
        return table


@dataclass(frozen=True)
class AgentMemory:
    """Which (pair index, qubit position) slots this agent's hardware holds."""

    agent: str
    slots: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class NoiseModel:
    """Channel imperfections: classical flip on the designated carrier, per-side misalignment."""

    flip_prob: float = 0.0
    misalign_alice: float = 0.0
    misalign_bob: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.flip_prob <= 0.5:
            raise ValueError("flip_prob must lie in [0, 0.5]")
        if not (math.isfinite(self.misalign_alice) and math.isfinite(self.misalign_bob)):
            raise ValueError("misalignment angles must be finite")


class RunRecord(NamedTuple):
    """Everything observable from one two-party run."""

    seed: int
    alice_bits: str
    bob_bits: str
    alice_actions: tuple[str, ...]
    bob_actions: tuple[str, ...]
    alice_action_number: int
    bob_action_number: int
    agree: bool
    strike: str

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "alice_bits": self.alice_bits,
            "bob_bits": self.bob_bits,
            "alice_actions": list(self.alice_actions),
            "bob_actions": list(self.bob_actions),
            "alice_action_number": self.alice_action_number,
            "bob_action_number": self.bob_action_number,
            "agree": self.agree,
            "strike": self.strike,
        }


class MultiRunRecord(NamedTuple):
    """One run with k agents sharing k-qubit all-or-nothing states."""

    seed: int
    n_bits: int
    agents: tuple[str, ...]
    bits: tuple[str, ...]
    action_numbers: tuple[int, ...]
    pairwise_agree: tuple[tuple[int, int, bool], ...]
    all_agree: bool
    strike: str

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n_bits": self.n_bits,
            "agents": list(self.agents),
            "bits": list(self.bits),
            "action_numbers": list(self.action_numbers),
            "pairwise_agree": {f"{i}-{j}": agree for i, j, agree in self.pairwise_agree},
            "all_agree": self.all_agree,
            "strike": self.strike,
        }


class StateRegistry:
    """Live shared states plus bookkeeping of which qubit slots are spent.

    Amplitudes are kept as plain lists between operations and driven through
    the same list kernels the simulator's own operators use, so a Monte Carlo
    run does not pay an ndarray round trip per measurement.  `state()`
    materializes a PureState view on demand.
    """

    def __init__(self, states: Sequence[PureState]) -> None:
        self._sizes = [st.num_qubits for st in states]
        self._amps = [st.amplitudes.tolist() for st in states]
        self._measured: set[tuple[int, int]] = set()

    def __len__(self) -> int:
        return len(self._amps)

    def state(self, index: int) -> PureState:
        return PureState._trusted(
            self._sizes[index],
            np.array(self._amps[index], dtype=np.complex128),
        )

    def rotate(self, index: int, position: int, theta: float) -> None:
        n = self._sizes[index]
        if not 0 <= position < n:
            raise ValueError(f"qubit {position} out of range for {n}-qubit register")
        if not math.isfinite(theta):
            raise ValueError("rotation angle must be finite")
        c = math.cos(theta / 2.0)
        s = math.sin(theta / 2.0)
        self._amps[index] = qsim._rotate_amps(n, self._amps[index], position, c, s)

    def measure(self, index: int, position: int, rng) -> int:
        slot = (index, position)
        if slot in self._measured:
            raise ValueError(f"slot {slot} was already measured")
        n = self._sizes[index]
        if not 0 <= position < n:
            raise ValueError(f"qubit {position} out of range for {n}-qubit register")
        bit, _, out = qsim._measure_amps(n, self._amps[index], position, rng)
        self._amps[index] = out
        self._measured.add(slot)
        return bit


# ------------------------------------------------------------------ utilities


@lru_cache(maxsize=32)
def _agent_names(k: int) -> tuple[str, ...]:
    return _CANONICAL_AGENTS[:k] + tuple(f"agent{i}" for i in range(2, k))


@lru_cache(maxsize=32)
def _issuer_names(k: int) -> tuple[str, ...]:
    return _CANONICAL_ISSUERS[:k] + tuple(f"issuer{i}" for i in range(2, k))


@lru_cache(maxsize=32)
def _shared_state(k: int) -> PureState:
    # States are never mutated in place (every gate/measurement builds a new
    # PureState), so one immutable instance can seed every pair slot.
    return qsim.prepare_bell() if k == 2 else qsim.prepare_ghz(k)


@lru_cache(maxsize=64)
def default_strike_set(n_bits: int) -> StrikeSet:
    """Placeholder strike labels for simulation runs (real sets come from headquarters)."""
    return StrikeSet(n_bits, _GeneratedLabels(n_bits))


def action_number(bits: str) -> int:
    """Big-endian value of a bit string: position 0 is the most significant bit."""
    if not bits or any(c not in "01" for c in bits):
        raise ValueError(f"not a bit string: {bits!r}")
    return int(bits, 2)


def strike_of(number: int, strikes: StrikeSet) -> str:
    """Resolve an action number against the strike set."""
    if not 0 <= number < (1 << strikes.n_bits):
        raise ValueError(f"action number {number} out of range")
    return strikes.labels[number]


def candidate_strikes(table: ActionTable, bits: str, strikes: StrikeSet) -> set[str]:
    """Strike labels still possible given one captured table and the bits.

    Tokens are opaque: a table resolves bits to this agent's actions but holds
    no linkage from action numbers to strike identities, so every label in the
    universe remains consistent.  (With n_bits >= 1 that is always >= 2
    candidates: the chain cutout works.)
    """
    if len(bits) != table.n_bits:
        raise ValueError("bit string length does not match the table")
    if strikes.n_bits > 20:
        raise ValueError("candidate enumeration is only supported for small strike sets")
    return set(strikes.labels)


def _fresh_tokens(rng, count: int) -> list[str]:
    # One random 64-bit base per table; consecutive offsets keep the tokens
    # distinct by construction while the base keeps them fresh per run.
    base = rng.getrandbits(64)
    return ["%016x" % ((base + i) & _MASK64) for i in range(count)]


# ----------------------------------------------------------------- operations


def _distribute(k: int, n_bits: int, rng) -> tuple[StateRegistry, list[AgentMemory]]:
    if n_bits < 1:
        raise ValueError("n_bits must be at least 1")
    states = [_shared_state(k)] * n_bits
    if k == 2:
        # which side physically holds which qubit of each pair is randomized
        positions = []
        for _ in range(n_bits):
            p = rng.getrandbits(1)
            positions.append((p, 1 - p))
    else:
        positions = []
        for _ in range(n_bits):
            perm = list(range(k))
            rng.shuffle(perm)
            positions.append(tuple(perm))
    memories = [
        AgentMemory(name, tuple((i, positions[i][a]) for i in range(n_bits)))
        for a, name in enumerate(_agent_names(k))
    ]
    return StateRegistry(states), memories


def distribute_pairs(n_bits: int, rng) -> tuple[StateRegistry, AgentMemory, AgentMemory]:
    """Create n_bits Bell pairs and deal one qubit of each to alice and bob."""
    registry, memories = _distribute(2, n_bits, rng)
    return registry, memories[0], memories[1]


def _precommunicate(k: int, n_bits: int, rng) -> list[ActionTable]:
    tables = []
    for agent, issuer in zip(_agent_names(k), _issuer_names(k)):
        it = iter(_fresh_tokens(rng, 2 * n_bits))
        tables.append(ActionTable._trusted(agent, issuer, tuple(zip(it, it))))
    return tables


def precommunicate(strikes: StrikeSet, rng) -> tuple[ActionTable, ActionTable]:
    """Issue action tables through the two disjoint chains (carl->alice, dave->bob)."""
    tables = _precommunicate(2, strikes.n_bits, rng)
    return tables[0], tables[1]


def agent_measure(
    memory: AgentMemory,
    table: ActionTable,
    noise: NoiseModel,
    registry: StateRegistry,
    rng,
) -> tuple[str, tuple[str, ...]]:
    """Measure this agent's slots in order; return (bit string, action tokens).

    The agent's misalignment angle rotates its own qubit just before each
    measurement.  The classical flip channel acts on every agent except alice,
    so exactly one side of a two-party run carries the flip noise.
    """
    if table.agent != memory.agent:
        raise ValueError(f"table for {table.agent!r} given to agent {memory.agent!r}")
    if table.n_bits != len(memory.slots):
        raise ValueError("table and memory disagree on the number of slots")
    theta = noise.misalign_alice if memory.agent == "alice" else noise.misalign_bob
    flip = noise.flip_prob if memory.agent != "alice" else 0.0
    entries = table.entries
    measure = registry.measure
    chars: list[str] = []
    actions: list[str] = []
    slot_no = 0
    for index, position in memory.slots:
        if theta != 0.0:
            registry.rotate(index, position, theta)
        bit = measure(index, position, rng)
        if flip and rng.random() < flip:
            bit ^= 1
        chars.append("01"[bit])
        actions.append(entries[slot_no][bit])
        slot_no += 1
    return "".join(chars), tuple(actions)


def run_protocol(
    n_bits: int,
    noise: NoiseModel,
    seed: int,
    strikes: StrikeSet | None = None,
) -> RunRecord:
    """One complete two-party run; a deterministic function of its arguments."""
    if strikes is None:
        strikes = default_strike_set(n_bits)
    elif strikes.n_bits != n_bits:
        raise ValueError("strike set size does not match n_bits")
    rng = SplitMix64(seed)
    registry, memories = _distribute(2, n_bits, rng)
    tables = _precommunicate(2, n_bits, rng)
    alice_bits, alice_actions = agent_measure(memories[0], tables[0], noise, registry, rng)
    bob_bits, bob_actions = agent_measure(memories[1], tables[1], noise, registry, rng)
    number_a = int(alice_bits, 2)
    number_b = int(bob_bits, 2)
    agree = alice_bits == bob_bits
    return RunRecord(
        seed=seed,
        alice_bits=alice_bits,
        bob_bits=bob_bits,
        alice_actions=alice_actions,
        bob_actions=bob_actions,
        alice_action_number=number_a,
        bob_action_number=number_b,
        agree=agree,
        strike=strikes.labels[number_a] if agree else AMBIGUOUS,
    )


def run_multiagent(
    k_agents: int,
    n_bits: int,
    noise: NoiseModel,
    seed: int,
    strikes: StrikeSet | None = None,
) -> MultiRunRecord:
    """One run with k agents sharing k-qubit all-or-nothing states per bit.

    With k_agents = 2 this performs exactly the same draws as run_protocol,
    so the bit strings and agreement reduce to the two-party record.
    """
    if k_agents < 2:
        raise ValueError("need at least 2 agents")
    if strikes is None:
        strikes = default_strike_set(n_bits)
    elif strikes.n_bits != n_bits:
        raise ValueError("strike set size does not match n_bits")
    rng = SplitMix64(seed)
    registry, memories = _distribute(k_agents, n_bits, rng)
    tables = _precommunicate(k_agents, n_bits, rng)
    names = _agent_names(k_agents)
    bits: list[str] = []
    for memory, table in zip(memories, tables):
        agent_bits, _ = agent_measure(memory, table, noise, registry, rng)
        bits.append(agent_bits)
    numbers = tuple(int(b, 2) for b in bits)
    pairwise = tuple(
        (i, j, bits[i] == bits[j])
        for i in range(k_agents)
        for j in range(i + 1, k_agents)
    )
    all_agree = all(flag for _, _, flag in pairwise)
    return MultiRunRecord(
        seed=seed,
        n_bits=n_bits,
        agents=names,
        bits=tuple(bits),
        action_numbers=numbers,
        pairwise_agree=pairwise,
        all_agree=all_agree,
        strike=strikes.labels[numbers[0]] if all_agree else AMBIGUOUS,
    )


def iter_runs(
    n_bits: int,
    noise: NoiseModel,
    trials: int,
    master_seed: int,
    strikes: StrikeSet | None = None,
) -> Iterator[RunRecord]:
    """Independent runs with per-trial seeds derived from the master seed."""
    for trial in range(trials):
        yield run_protocol(n_bits, noise, derive_seed(master_seed, trial), strikes)


def iter_multiagent_runs(
    k_agents: int,
    n_bits: int,
    noise: NoiseModel,
    trials: int,
    master_seed: int,
    strikes: StrikeSet | None = None,
) -> Iterator[MultiRunRecord]:
    """Independent multi-agent runs with per-trial derived seeds."""
    for trial in range(trials):
        yield run_multiagent(k_agents, n_bits, noise, derive_seed(master_seed, trial), strikes)
