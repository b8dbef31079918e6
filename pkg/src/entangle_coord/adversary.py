"""Attack scenarios against the entanglement-distribution step.

Each attack replays the two-party measurement phase with a third party wired
into every shared resource: Eve substitutes her own tripartite states for the
honest Bell pairs, while Wolf keeps the pairs intact and splices an ancilla
onto Bob's qubit with a CNOT.  Every attack produces an AttackReport whose
rates are plain per-trial frequencies, so they can be cross-checked against
Born-rule chains computed independently.

Qubit layout inside each trial's register:
  - Eve attacks (GHZ / W / biseparable): eve = 0, alice = 1, bob = 2.
  - Wolf's CNOT attack: alice = 0, bob = 1, wolf ancilla = 2 (appending the
    ancilla keeps the constructed triple bit-identical to prepare_ghz(3)
    when the ancilla starts in |0>).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from . import qsim
from .seeding import SplitMix64, derive_seed

GHZ_ATTACK = "GHZ"
W_ATTACK = "W"
BISEPARABLE_ATTACK = "Biseparable"
WOLF_CNOT_ATTACK = "WolfCNOT"


@dataclass(frozen=True)
class AttackReport:
    """Per-trial transcripts and aggregate rates for one attack scenario."""

    kind: str
    n_bits: int
    trials: int
    alice_bits: tuple[str, ...]
    bob_bits: tuple[str, ...]
    eavesdrop_success_rate: float
    agreement_rate: float
    conditional_stats: dict
    eve_bits: tuple[str, ...] | None = None
    wolf_bits: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.n_bits < 1:
            raise ValueError("n_bits must be at least 1")
        for rate in (self.eavesdrop_success_rate, self.agreement_rate):
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"rate {rate!r} outside [0, 1]")
        attacker = self.eve_bits if self.eve_bits is not None else self.wolf_bits
        for series in (self.alice_bits, self.bob_bits, attacker):
            if series is None or len(series) != self.trials:
                raise ValueError("per-trial series must have one entry per trial")
            if any(len(s) != self.n_bits for s in series):
                raise ValueError("bit strings must have length n_bits")

    def to_dict(self) -> dict:
        out: dict = {
            "kind": self.kind,
            "n_bits": self.n_bits,
            "trials": self.trials,
        }
        if self.eve_bits is not None:
            out["eve_bits"] = list(self.eve_bits)
        if self.wolf_bits is not None:
            out["wolf_bits"] = list(self.wolf_bits)
        out["alice_bits"] = list(self.alice_bits)
        out["bob_bits"] = list(self.bob_bits)
        out["eavesdrop_success_rate"] = self.eavesdrop_success_rate
        out["agreement_rate"] = self.agreement_rate
        out["conditional_stats"] = dict(self.conditional_stats)
        return out


def _check_args(n_bits: int, trials: int) -> None:
    if n_bits < 1:
        raise ValueError("n_bits must be at least 1")
    if trials < 1:
        raise ValueError("trials must be at least 1")


@lru_cache(maxsize=8)
def _shared(kind: str) -> qsim.PureState:
    # immutable prepared states reused across trials
    if kind == "ghz":
        return qsim.prepare_ghz(3)
    if kind == "w":
        return qsim.prepare_w()
    if kind == "biseparable":
        return qsim.prepare_biseparable()
    raise AssertionError(kind)


def eve_ghz_attack(n_bits: int, trials: int, eve_first: bool, seed: int) -> AttackReport:
    """Eve swaps each Bell pair for a GHZ triple and keeps one qubit.

    Because every GHZ measurement collapses the whole triple onto |000> or
    |111>, Eve reads the full action number whether she measures before or
    after the honest parties; the report also verifies that after the first
    measurement the two remaining holders share a fully separable state.
    """
    _check_args(n_bits, trials)
    ghz = _shared("ghz")
    eve_rows, alice_rows, bob_rows = [], [], []
    separable_checks = 0
    separable_hits = 0
    for trial in range(trials):
        rng = SplitMix64(derive_seed(seed, trial))
        e_chars, a_chars, b_chars = [], [], []
        for _ in range(n_bits):
            if eve_first:
                out = qsim.measure_qubit(ghz, 0, rng)
                e_bit, state = out.bit, out.post_state
                # the remaining holders (alice on 1, bob on 2) must be left
                # with a product state even though their bits stay correlated
                separable_checks += 1
                if (
                    qsim.is_product(state, ((1,), (0, 2))).separable
                    and qsim.is_product(state, ((2,), (0, 1))).separable
                ):
                    separable_hits += 1
                out = qsim.measure_qubit(state, 1, rng)
                a_bit, state = out.bit, out.post_state
                b_bit = qsim.measure_qubit(state, 2, rng).bit
            else:
                out = qsim.measure_qubit(ghz, 1, rng)
                a_bit, state = out.bit, out.post_state
                separable_checks += 1
                if (
                    qsim.is_product(state, ((2,), (0, 1))).separable
                    and qsim.is_product(state, ((0,), (1, 2))).separable
                ):
                    separable_hits += 1
                out = qsim.measure_qubit(state, 2, rng)
                b_bit, state = out.bit, out.post_state
                e_bit = qsim.measure_qubit(state, 0, rng).bit
            e_chars.append("01"[e_bit])
            a_chars.append("01"[a_bit])
            b_chars.append("01"[b_bit])
        eve_rows.append("".join(e_chars))
        alice_rows.append("".join(a_chars))
        bob_rows.append("".join(b_chars))
    success = sum(e == a for e, a in zip(eve_rows, alice_rows)) / trials
    agreement = sum(a == b for a, b in zip(alice_rows, bob_rows)) / trials
    return AttackReport(
        kind=GHZ_ATTACK,
        n_bits=n_bits,
        trials=trials,
        alice_bits=tuple(alice_rows),
        bob_bits=tuple(bob_rows),
        eavesdrop_success_rate=success,
        agreement_rate=agreement,
        conditional_stats={
            "eve_first": bool(eve_first),
            "remainder_separable_rate": separable_hits / separable_checks,
        },
        eve_bits=tuple(eve_rows),
    )


def eve_w_attack(n_bits: int, trials: int, seed: int) -> AttackReport:
    """Eve distributes W triples instead; the split of outcomes betrays her.

    Measuring her qubit first, Eve sees 0 with probability 1/3 (then knows
    alice = bob = 1) and 1 with probability 2/3 (then alice and bob share an
    anti-correlated pair and always disagree), so the channel degrades into
    denial of service rather than eavesdropping.
    """
    _check_args(n_bits, trials)
    w_state = _shared("w")
    eve_rows, alice_rows, bob_rows = [], [], []
    eve_zero = 0
    both_one_given_zero = 0
    disagree_given_one = 0
    slots = 0
    for trial in range(trials):
        rng = SplitMix64(derive_seed(seed, trial))
        e_chars, a_chars, b_chars = [], [], []
        for _ in range(n_bits):
            out = qsim.measure_qubit(w_state, 0, rng)
            e_bit, state = out.bit, out.post_state
            out = qsim.measure_qubit(state, 1, rng)
            a_bit, state = out.bit, out.post_state
            b_bit = qsim.measure_qubit(state, 2, rng).bit
            slots += 1
            if e_bit == 0:
                eve_zero += 1
                both_one_given_zero += a_bit == 1 and b_bit == 1
            else:
                disagree_given_one += a_bit != b_bit
            e_chars.append("01"[e_bit])
            a_chars.append("01"[a_bit])
            b_chars.append("01"[b_bit])
        eve_rows.append("".join(e_chars))
        alice_rows.append("".join(a_chars))
        bob_rows.append("".join(b_chars))
    success = sum(e == a for e, a in zip(eve_rows, alice_rows)) / trials
    agreement = sum(a == b for a, b in zip(alice_rows, bob_rows)) / trials
    return AttackReport(
        kind=W_ATTACK,
        n_bits=n_bits,
        trials=trials,
        alice_bits=tuple(alice_rows),
        bob_bits=tuple(bob_rows),
        eavesdrop_success_rate=success,
        agreement_rate=agreement,
        conditional_stats={
            "eve_zero_rate": eve_zero / slots,
            "both_one_given_eve_zero": (
                both_one_given_zero / eve_zero if eve_zero else 0.0
            ),
            "disagree_given_eve_one": (
                disagree_given_one / (slots - eve_zero) if slots - eve_zero else 0.0
            ),
        },
        eve_bits=tuple(eve_rows),
    )


def biseparable_attack(n_bits: int, trials: int, seed: int) -> AttackReport:
    """Eve keeps the unentangled factor of a biseparable triple.

    Her qubit is the product factor |1>, so her outcomes carry zero
    correlation with the action number — and the residual anti-correlated
    pair breaks Alice-Bob agreement outright.
    """
    _check_args(n_bits, trials)
    state0 = _shared("biseparable")
    eve_rows, alice_rows, bob_rows = [], [], []
    joint = {"00": 0, "01": 0, "10": 0, "11": 0}
    eve_ones = 0
    slots = 0
    eve_flat: list[int] = []
    alice_flat: list[int] = []
    for trial in range(trials):
        rng = SplitMix64(derive_seed(seed, trial))
        e_chars, a_chars, b_chars = [], [], []
        for _ in range(n_bits):
            out = qsim.measure_qubit(state0, 0, rng)
            e_bit, state = out.bit, out.post_state
            out = qsim.measure_qubit(state, 1, rng)
            a_bit, state = out.bit, out.post_state
            b_bit = qsim.measure_qubit(state, 2, rng).bit
            slots += 1
            eve_ones += e_bit
            joint["01"[a_bit] + "01"[b_bit]] += 1
            eve_flat.append(e_bit)
            alice_flat.append(a_bit)
            e_chars.append("01"[e_bit])
            a_chars.append("01"[a_bit])
            b_chars.append("01"[b_bit])
        eve_rows.append("".join(e_chars))
        alice_rows.append("".join(a_chars))
        bob_rows.append("".join(b_chars))
    success = sum(e == a for e, a in zip(eve_rows, alice_rows)) / trials
    agreement = sum(a == b for a, b in zip(alice_rows, bob_rows)) / trials
    return AttackReport(
        kind=BISEPARABLE_ATTACK,
        n_bits=n_bits,
        trials=trials,
        alice_bits=tuple(alice_rows),
        bob_bits=tuple(bob_rows),
        eavesdrop_success_rate=success,
        agreement_rate=agreement,
        conditional_stats={
            "eve_one_rate": eve_ones / slots,
            "alice_bob_joint": {k: v / slots for k, v in joint.items()},
            "correlation_eve_alice": _pearson(eve_flat, alice_flat),
        },
        eve_bits=tuple(eve_rows),
    )


def _pearson(xs: list[int], ys: list[int]) -> float:
    # correlation with the convention that a constant series correlates 0.0
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    vx = sum((x - mx) ** 2 for x in xs)
    vy = sum((y - my) ** 2 for y in ys)
    if vx == 0.0 or vy == 0.0:
        return 0.0
    cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return cov / (vx * vy) ** 0.5


def build_wolf_triple(target_bit: int) -> qsim.PureState:
    """Bell pair extended by Wolf's ancilla through a CNOT off Bob's qubit."""
    if target_bit not in (0, 1):
        raise ValueError("target_bit must be 0 or 1")
    pair = qsim.prepare_bell()
    triple = qsim.tensor_product(pair, qsim.basis_state(1, target_bit))
    return qsim.apply_cnot(triple, control=1, target=2)


def wolf_cnot_attack(n_bits: int, trials: int, target_bit: int, seed: int) -> AttackReport:
    """Wolf CNOTs an ancilla off each of Bob's qubits during custody.

    With the ancilla prepared in |0> the construction is exactly a GHZ
    triple, so Wolf's ancilla measurements read out the action number while
    Alice and Bob still agree perfectly; with |1> he reads the complement.
    """
    _check_args(n_bits, trials)
    triple0 = build_wolf_triple(target_bit)
    ghz_fidelity = qsim.state_fidelity(triple0, qsim.prepare_ghz(3))
    wolf_rows, alice_rows, bob_rows = [], [], []
    match_alice = 0
    complement_alice = 0
    slots = 0
    for trial in range(trials):
        rng = SplitMix64(derive_seed(seed, trial))
        w_chars, a_chars, b_chars = [], [], []
        for _ in range(n_bits):
            out = qsim.measure_qubit(triple0, 0, rng)
            a_bit, state = out.bit, out.post_state
            out = qsim.measure_qubit(state, 1, rng)
            b_bit, state = out.bit, out.post_state
            w_bit = qsim.measure_qubit(state, 2, rng).bit
            slots += 1
            match_alice += w_bit == a_bit
            complement_alice += w_bit != a_bit
            w_chars.append("01"[w_bit])
            a_chars.append("01"[a_bit])
            b_chars.append("01"[b_bit])
        wolf_rows.append("".join(w_chars))
        alice_rows.append("".join(a_chars))
        bob_rows.append("".join(b_chars))
    success = sum(w == a for w, a in zip(wolf_rows, alice_rows)) / trials
    agreement = sum(a == b for a, b in zip(alice_rows, bob_rows)) / trials
    return AttackReport(
        kind=WOLF_CNOT_ATTACK,
        n_bits=n_bits,
        trials=trials,
        alice_bits=tuple(alice_rows),
        bob_bits=tuple(bob_rows),
        eavesdrop_success_rate=success,
        agreement_rate=agreement,
        conditional_stats={
            "target_bit": target_bit,
            "ghz_fidelity": ghz_fidelity,
            "wolf_matches_alice_rate": match_alice / slots,
            "wolf_complements_alice_rate": complement_alice / slots,
        },
        wolf_bits=tuple(wolf_rows),
    )
