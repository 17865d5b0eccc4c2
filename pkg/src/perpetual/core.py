"""Domain model for sequential approval elections.

A round is a decision instance (candidates plus one approval set per voter);
a decision sequence is a list of rounds over a fixed electorate, and a history
additionally fixes the winner chosen in each round. Satisfaction and dry-spell
statistics, round insertion, party structure on simple sequences, and
tie-breaking all live here. Every object is immutable after construction, so
instances can be shared freely across concurrent evaluations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional


class NonSimpleSequenceError(ValueError):
    """Party statistics were requested for a sequence that is not simple."""


class InvariantViolation(RuntimeError):
    """An engine invariant failed; indicates a bug, never bad user input."""


def _as_approval_set(approved, candidates: tuple[str, ...]) -> frozenset:
    approval = frozenset(approved)
    if not approval:
        raise ValueError("approval sets must be non-empty")
    stray = approval - set(candidates)
    if stray:
        raise ValueError(f"approved candidates {sorted(stray)} not in round candidates {list(candidates)}")
    return approval


@dataclass(frozen=True)
class DecisionInstance:
    """One round: an ordered candidate list and one approval set per voter."""

    candidates: tuple[str, ...]
    approvals: tuple[frozenset, ...]

    def __post_init__(self):
        if len(set(self.candidates)) != len(self.candidates):
            raise ValueError(f"duplicate candidate identifiers in {self.candidates}")
        if not self.candidates:
            raise ValueError("a decision instance needs at least one candidate")
        for approval in self.approvals:
            if not approval:
                raise ValueError("approval sets must be non-empty")
            if not approval <= set(self.candidates):
                raise ValueError("approval set contains unknown candidates")

    @property
    def voter_count(self) -> int:
        return len(self.approvals)

    def approvers(self, candidate: str) -> tuple[int, ...]:
        if candidate not in self.candidates:
            raise ValueError(f"candidate {candidate!r} not in this round")
        return tuple(v for v, approval in enumerate(self.approvals) if candidate in approval)


def instance(approvals: Iterable[Iterable[str]], candidates: Optional[Iterable[str]] = None) -> DecisionInstance:
    """Build a round from per-voter approvals; candidates default to their sorted union."""
    rows = [frozenset(a) for a in approvals]
    if candidates is None:
        cands = tuple(sorted(set().union(*rows))) if rows else ()
    else:
        cands = tuple(candidates)
    for row in rows:
        _as_approval_set(row, cands)
    return DecisionInstance(cands, tuple(rows))


@dataclass(frozen=True)
class DecisionSequence:
    """A fixed electorate deciding a list of rounds in order."""

    voter_count: int
    rounds: tuple[DecisionInstance, ...]

    def __post_init__(self):
        if self.voter_count < 1:
            raise ValueError("need at least one voter")
        if not self.rounds:
            raise ValueError("need at least one round")
        for i, rnd in enumerate(self.rounds):
            if rnd.voter_count != self.voter_count:
                raise ValueError(
                    f"round {i} has {rnd.voter_count} approval rows, expected {self.voter_count}"
                )

    def __len__(self) -> int:
        return len(self.rounds)


def sequence(rounds: Iterable[DecisionInstance]) -> DecisionSequence:
    rounds = tuple(rounds)
    if not rounds:
        raise ValueError("need at least one round")
    return DecisionSequence(rounds[0].voter_count, rounds)


def repeat_profile(approvals: Iterable[Iterable[str]], k: int,
                   candidates: Optional[Iterable[str]] = None) -> DecisionSequence:
    """The k-fold sequence that repeats one approval profile every round."""
    if k < 1:
        raise ValueError("k must be >= 1")
    rnd = instance(approvals, candidates)
    return DecisionSequence(rnd.voter_count, (rnd,) * k)


@dataclass(frozen=True)
class ChoiceSequence:
    """The winners picked in rounds 1..k."""

    winners: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.winners)

    def __iter__(self):
        return iter(self.winners)


@dataclass(frozen=True)
class DecisionHistory:
    """A decision sequence together with the choices already made."""

    sequence: DecisionSequence
    choices: ChoiceSequence

    def __post_init__(self):
        if len(self.choices) != len(self.sequence):
            raise ValueError("choice sequence length must match the number of rounds")
        for i, winner in enumerate(self.choices):
            if winner not in self.sequence.rounds[i].candidates:
                raise ValueError(f"round {i} winner {winner!r} is not a candidate of that round")

    def satisfied(self, voter: int, round_index: int) -> bool:
        return self.choices.winners[round_index] in self.sequence.rounds[round_index].approvals[voter]


def history(seq: DecisionSequence, winners: Iterable[str]) -> DecisionHistory:
    return DecisionHistory(seq, ChoiceSequence(tuple(winners)))


@dataclass(frozen=True)
class TieBreaker:
    """A strict total order on candidate names (and one on voter indices).

    The order is fixed for a whole run. By default candidates are compared
    lexicographically and voters by index; an explicit priority list (highest
    priority first) overrides this, and then every name that can occur must be
    listed.
    """

    candidate_order: Optional[tuple[str, ...]] = None
    voter_order: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        for order in (self.candidate_order, self.voter_order):
            if order is not None and len(set(order)) != len(order):
                raise ValueError("tie-breaking orders must not repeat entries")

    def candidate_key(self, candidate: str):
        if self.candidate_order is None:
            return candidate
        try:
            return self.candidate_order.index(candidate)
        except ValueError:
            raise ValueError(f"candidate {candidate!r} missing from explicit tie-breaking order") from None

    def voter_key(self, voter: int):
        if self.voter_order is None:
            return voter
        try:
            return self.voter_order.index(voter)
        except ValueError:
            raise ValueError(f"voter {voter} missing from explicit tie-breaking order") from None

    def best_candidate(self, candidates: Iterable[str]) -> str:
        pool = list(candidates)
        if not pool:
            raise ValueError("cannot tie-break an empty candidate set")
        return min(pool, key=self.candidate_key)


LEXICOGRAPHIC = TieBreaker()


def _check_voter(voter: int, n: int) -> None:
    if not 0 <= voter < n:
        raise IndexError(f"voter {voter} out of range for {n} voters")


def satisfaction(hist: DecisionHistory, voter: int, upto: Optional[int] = None) -> int:
    """Number of rounds (optionally only the first `upto`) whose winner the voter approved."""
    _check_voter(voter, hist.sequence.voter_count)
    k = len(hist.sequence) if upto is None else upto
    return sum(1 for i in range(k) if hist.satisfied(voter, i))


def max_dry_spell(hist: DecisionHistory, voter: int) -> int:
    """Length of the longest run of consecutive rounds that never satisfied the voter.

    Trailing (still open) runs count with their length so far, so the result
    is the true maximum over every window inside the history.
    """
    _check_voter(voter, hist.sequence.voter_count)
    longest = current = 0
    for i in range(len(hist.sequence)):
        if hist.satisfied(voter, i):
            current = 0
        else:
            current += 1
            longest = max(longest, current)
    return longest


def insert_round(seq: DecisionSequence, position: int, inserted: DecisionInstance) -> DecisionSequence:
    """A new sequence with `inserted` spliced in before index `position` (0..k)."""
    if not 0 <= position <= len(seq):
        raise ValueError(f"insertion position {position} outside 0..{len(seq)}")
    if inserted.voter_count != seq.voter_count:
        raise ValueError("inserted round has the wrong number of approval rows")
    rounds = seq.rounds[:position] + (inserted,) + seq.rounds[position:]
    return DecisionSequence(seq.voter_count, rounds)


def is_simple(seq: DecisionSequence) -> bool:
    """True iff all rounds share one profile and candidate set and every approval is a singleton."""
    first = seq.rounds[0]
    if any(len(approval) != 1 for approval in first.approvals):
        return False
    return all(rnd.candidates == first.candidates and rnd.approvals == first.approvals
               for rnd in seq.rounds[1:])


def party_size(seq: DecisionSequence, voter: int) -> int:
    """On a simple sequence: how many voters share this voter's approval set."""
    _check_voter(voter, seq.voter_count)
    if not is_simple(seq):
        raise NonSimpleSequenceError("party sizes are only defined on simple sequences")
    mine = seq.rounds[0].approvals[voter]
    return sum(1 for approval in seq.rounds[0].approvals if approval == mine)


def uncontroversial_winner(rnd: DecisionInstance) -> Optional[str]:
    """The candidate c with intersection of all approval sets exactly {c}, else None."""
    common = frozenset(rnd.candidates)
    for approval in rnd.approvals:
        common &= approval
    if len(common) == 1:
        return next(iter(common))
    return None
