"""Apportionment methods and their bridges to perpetual rules on simple sequences.

Two seat-by-seat methods are implemented exactly: the greedy highest-quotient
divisor method (votes over seats-plus-one) and Frege's accumulating-weight
method, where every round each party gains its vote share and the seated
party pays one. On simple decision sequences the consensus rule coincides
with Frege's method (an exact per-round weight identity) and both
proportional-approval and load-balancing coincide with the divisor method;
the verifiers here replay both sides and compare them seat by seat.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import axioms, corpus, rules
from .core import DecisionSequence, InvariantViolation


class NonIntegralPartyError(ValueError):
    """The electorate size does not split into whole voters per party."""


@dataclass(frozen=True)
class ApportionmentInstance:
    """Vote shares (summing to one exactly) and the number of seats to fill."""

    shares: tuple[Fraction, ...]
    house_size: int

    def __post_init__(self):
        if self.house_size < 1:
            raise ValueError("house size must be >= 1")
        if not self.shares or any(p <= 0 for p in self.shares):
            raise ValueError("every party needs a positive vote share")
        if sum(self.shares) != 1:
            raise ValueError(f"shares must sum to 1 exactly, got {sum(self.shares)}")

    @property
    def parties(self) -> int:
        return len(self.shares)


def from_votes(votes: Sequence[int], house_size: int) -> ApportionmentInstance:
    """Normalize integer vote counts to exact shares."""
    votes = list(votes)
    if any(v < 1 for v in votes):
        raise ValueError("vote counts must be positive integers")
    total = sum(votes)
    return ApportionmentInstance(tuple(Fraction(v, total) for v in votes), house_size)


@dataclass(frozen=True)
class SeatSequence:
    """Party index (0-based) awarded each seat, in order."""

    seats: tuple[int, ...]

    def totals(self, parties: int) -> tuple[int, ...]:
        counts = [0] * parties
        for party in self.seats:
            counts[party] += 1
        return tuple(counts)


def frege(inst: ApportionmentInstance,
          party_order: Optional[Sequence[int]] = None) -> SeatSequence:
    return frege_with_weights(inst, party_order)[0]


def frege_with_weights(inst: ApportionmentInstance,
                       party_order: Optional[Sequence[int]] = None
                       ) -> tuple[SeatSequence, list[tuple[Fraction, ...]]]:
    """Seat sequence plus the weight vector entering every round (and the final one).

    Round t seats the party with the highest accumulated weight; every party
    then gains its share and the seated party pays 1, so the weights keep
    summing to exactly 1.
    """
    order = list(party_order) if party_order is not None else list(range(inst.parties))
    weights = list(inst.shares)
    trace = [tuple(weights)]
    seats = []
    for _t in range(inst.house_size):
        best = max(range(inst.parties), key=lambda i: (weights[i], -order.index(i)))
        seats.append(best)
        weights = [w + p - (1 if i == best else 0)
                   for i, (w, p) in enumerate(zip(weights, inst.shares))]
        if sum(weights) != 1:
            raise InvariantViolation("frege weights must keep summing to 1")
        trace.append(tuple(weights))
    return SeatSequence(tuple(seats)), trace


def dhondt(inst: ApportionmentInstance,
           party_order: Optional[Sequence[int]] = None) -> SeatSequence:
    """Greedy highest-quotient apportionment: each seat to argmax share/(seats+1)."""
    order = list(party_order) if party_order is not None else list(range(inst.parties))
    held = [0] * inst.parties
    seats = []
    for _t in range(inst.house_size):
        best = max(range(inst.parties),
                   key=lambda i: (inst.shares[i] / (held[i] + 1), -order.index(i)))
        seats.append(best)
        held[best] += 1
    return SeatSequence(tuple(seats))


_METHODS = {"dhondt": dhondt, "frege": frege}


def get_method(method_id: str):
    try:
        return _METHODS[method_id]
    except KeyError:
        raise ValueError(f"unknown apportionment method {method_id!r}") from None


def party_sizes(inst: ApportionmentInstance, n: int) -> tuple[int, ...]:
    sizes = []
    for p in inst.shares:
        count = p * n
        if count.denominator != 1:
            raise NonIntegralPartyError(f"share {p} of {n} voters is not a whole number")
        sizes.append(int(count))
    return tuple(sizes)


def to_simple_sequence(inst: ApportionmentInstance, n: int, k: Optional[int] = None) -> DecisionSequence:
    """The simple sequence with n*p_i voters per party; party i becomes candidate i."""
    return corpus.simple_sequence(party_sizes(inst, n), inst.house_size if k is None else k)


def _aligned_instance(inst: ApportionmentInstance, k: Optional[int]) -> ApportionmentInstance:
    return inst if k is None or k == inst.house_size else ApportionmentInstance(inst.shares, k)


def verify_consensus_frege_identity(inst: ApportionmentInstance, n: int,
                                    k: Optional[int] = None) -> axioms.AxiomVerdict:
    """Replay both methods and require seat-by-seat agreement plus the exact
    per-round identity (party size) * (member weight) == n * (party weight)."""
    inst = _aligned_instance(inst, k)
    sizes = party_sizes(inst, n)
    seq = to_simple_sequence(inst, n)
    labels = corpus.candidate_letters(inst.parties)
    run = rules.run_rule("consensus", seq)
    seats, frege_trace = frege_with_weights(inst)

    def refute(round_index, detail):
        witness = axioms.Witness(
            "consensus-frege", "consensus", seq, None,
            {"round": round_index, "detail": detail,
             "shares": tuple(str(p) for p in inst.shares), "voters": n},
        )
        return axioms.AxiomVerdict(axioms.REFUTED, witness, {"rounds": inst.house_size})

    chosen_parties = tuple(labels.index(w) for w in run.winners)
    if chosen_parties != seats.seats:
        return refute(None, f"choices {chosen_parties} != seats {seats.seats}")
    voter_of_party = []
    offset = 0
    for size in sizes:
        voter_of_party.append(offset)
        offset += size
    for t in range(inst.house_size + 1):
        consensus_weights = run.states[t]["weights"]
        for i, size in enumerate(sizes):
            members = consensus_weights[voter_of_party[i]:voter_of_party[i] + size]
            if any(w != members[0] for w in members):
                return refute(t, f"party {i} members diverged: {members}")
            if size * members[0] != n * frege_trace[t][i]:
                return refute(
                    t,
                    f"party {i}: {size} * {members[0]} != {n} * {frege_trace[t][i]}",
                )
    return axioms.AxiomVerdict(axioms.HOLDS, None, {"rounds": inst.house_size})


def verify_dhondt_equivalence(rule_id: str, inst: ApportionmentInstance, n: int,
                              k: Optional[int] = None) -> axioms.AxiomVerdict:
    """The rule's choices on the simple sequence must equal the divisor seat sequence."""
    if rule_id not in ("pav", "phragmen"):
        raise ValueError("the divisor equivalence covers 'pav' and 'phragmen' only")
    inst = _aligned_instance(inst, k)
    seq = to_simple_sequence(inst, n)
    labels = corpus.candidate_letters(inst.parties)
    run = rules.run_rule(rule_id, seq)
    seats = dhondt(inst)
    chosen = tuple(labels.index(w) for w in run.winners)
    if chosen != seats.seats:
        witness = axioms.Witness(
            "dhondt-equivalence", rule_id, seq, None,
            {"choices": chosen, "seats": seats.seats,
             "shares": tuple(str(p) for p in inst.shares), "voters": n},
        )
        return axioms.AxiomVerdict(axioms.REFUTED, witness, {"rounds": inst.house_size})
    return axioms.AxiomVerdict(axioms.HOLDS, None, {"rounds": inst.house_size})


def quota_audit(seats: SeatSequence, inst: ApportionmentInstance) -> tuple[axioms.QuotaReport, tuple]:
    """Floor/ceiling quota satisfaction per party at every prefix house size."""
    held = [0] * inst.parties
    violations = []
    for t, party in enumerate(seats.seats, start=1):
        held[party] += 1
        for i, share in enumerate(inst.shares):
            quota = t * share
            if held[i] < math.floor(quota):
                violations.append(("lower", t, i, held[i], math.floor(quota)))
            elif held[i] > math.ceil(quota):
                violations.append(("upper", t, i, held[i], math.ceil(quota)))
    labels = corpus.candidate_letters(inst.parties)
    rows = tuple(
        axioms.PartyQuotaRow(
            label=labels[i],
            size=inst.shares[i],
            satisfaction=held[i],
            lower_bound=math.floor(inst.house_size * inst.shares[i]),
            upper_bound=math.ceil(inst.house_size * inst.shares[i]),
        )
        for i in range(inst.parties)
    )
    report = axioms.QuotaReport(1, inst.house_size, rows)
    return report, tuple(violations)


# --------------------------------------------------------------------------
# quota-violation fixtures


def _vote_compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _vote_compositions(total - first, parts - 1):
            yield (first,) + rest


def find_quota_violation(method_id: str, which: str, max_total_votes: int = 12,
                         max_parties: int = 5, max_house: int = 30):
    """Deterministic scan for the smallest instance where the method breaks a quota.

    Instances are ordered by total votes, then party count, then votes
    lexicographically; for each, every house size up to the cap is audited at
    all prefixes. Returns (votes, house_size, violation) or None.
    """
    method = get_method(method_id)
    for total in range(2, max_total_votes + 1):
        for parts in range(2, min(max_parties, total) + 1):
            for votes in _vote_compositions(total, parts):
                inst = from_votes(votes, max_house)
                seats = method(inst)
                _report, violations = quota_audit(seats, inst)
                for violation in violations:
                    if violation[0] == which:
                        return votes, violation[1], violation
    return None


#: Smallest scanned instance where the divisor method exceeds a ceiling quota.
DHONDT_AUQ_FIXTURE: dict = {"votes": (6, 1, 1, 1), "house_size": 3}

#: Smallest scanned instance where Frege's method undercuts a floor quota.
FREGE_ALQ_FIXTURE: dict = {"votes": (1, 3), "house_size": 2}


def verify_fixtures() -> None:
    """Re-check that the pinned regression instances still violate their quotas."""
    votes, k = DHONDT_AUQ_FIXTURE["votes"], DHONDT_AUQ_FIXTURE["house_size"]
    _report, violations = quota_audit(dhondt(from_votes(votes, k)), from_votes(votes, k))
    if not any(v[0] == "upper" for v in violations):
        raise corpus.CorpusVerificationError("divisor-method upper-quota fixture no longer violates")
    votes, k = FREGE_ALQ_FIXTURE["votes"], FREGE_ALQ_FIXTURE["house_size"]
    _report, violations = quota_audit(frege(from_votes(votes, k)), from_votes(votes, k))
    if not any(v[0] == "lower" for v in violations):
        raise corpus.CorpusVerificationError("frege lower-quota fixture no longer violates")
