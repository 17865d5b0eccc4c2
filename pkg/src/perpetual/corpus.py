"""Reference implementations and the library of known witness constructions.

Two kinds of ground truth live here. First, ``naive_rule_reference``: for each
rule a from-scratch re-derivation of every round's decision (closed-form
weights for the weighted methods, exhaustive subset minimization for load
balancing) that never threads incremental state, used as the oracle against
the engine in equivalence campaigns. Second, the corpus: parameterized
families of sequences with known outcomes (tight dry-spell families, the
insertion counterexamples, golden choice traces), each rendered to a golden
file and re-verified by replay on demand.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Optional

from . import rules
from .core import (
    ChoiceSequence,
    DecisionInstance,
    DecisionSequence,
    TieBreaker,
    history,
    instance,
    max_dry_spell,
    repeat_profile,
    sequence,
)

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


class SizeBoundError(ValueError):
    """The naive reference is restricted to small instances."""


class CorpusVerificationError(RuntimeError):
    """A corpus entry no longer reproduces its recorded outcome."""


def candidate_letters(m: int) -> tuple[str, ...]:
    if m > len(_LETTERS):
        raise ValueError(f"at most {len(_LETTERS)} single-letter candidates supported")
    return tuple(_LETTERS[:m])


def simple_sequence(party_sizes, k: int) -> DecisionSequence:
    """The canonical simple sequence: parties in the given order, candidates a, b, c, ...

    Voters come in contiguous blocks, one block per party, every round repeats
    the same singleton-approval profile.
    """
    sizes = list(party_sizes)
    if not sizes or any(s < 1 for s in sizes):
        raise ValueError("party sizes must be positive")
    names = candidate_letters(len(sizes))
    approvals = []
    for name, size in zip(names, sizes):
        approvals.extend([{name}] * size)
    return repeat_profile(approvals, k, candidates=names)


# --------------------------------------------------------------------------
# from-scratch references


def _check_size(seq: DecisionSequence, max_n: int = 8, max_k: int = 10) -> None:
    if seq.voter_count > max_n or len(seq) > max_k:
        raise SizeBoundError(
            f"naive reference limited to n <= {max_n}, k <= {max_k} "
            f"(got n = {seq.voter_count}, k = {len(seq)})"
        )


def _satisfaction_counts(seq: DecisionSequence, winners: list[str]) -> list[int]:
    sats = [0] * seq.voter_count
    for i, winner in enumerate(winners):
        for v, approval in enumerate(seq.rounds[i].approvals):
            if winner in approval:
                sats[v] += 1
    return sats


def _naive_wam_weights(rule_id: str, seq: DecisionSequence, winners: list[str]) -> list[Fraction]:
    """Closed-form weights entering round len(winners), recomputed from scratch."""
    n = seq.voter_count
    t = len(winners)
    if rule_id == "av":
        return [Fraction(1)] * n
    if rule_id == "pav":
        sats = _satisfaction_counts(seq, winners)
        return [Fraction(1, s + 1) for s in sats]
    if rule_id == "reset":
        weights = []
        for v in range(n):
            last_win = -1
            for i in range(t):
                if winners[i] in seq.rounds[i].approvals[v]:
                    last_win = i
            weights.append(Fraction(t - last_win))
        return weights
    if rule_id == "exponential":
        weights = []
        for v in range(n):
            exponent = 0
            for i in range(t):
                if winners[i] in seq.rounds[i].approvals[v]:
                    exponent += _factorial(i + 1)
            weights.append(Fraction(2 * t + 1, 2 ** exponent))
        return weights
    raise ValueError(f"no closed-form weights for rule {rule_id!r}")


def _factorial(k: int) -> int:
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


def _naive_consensus_weights(seq: DecisionSequence, winners: list[str]) -> list[Fraction]:
    n = seq.voter_count
    weights = [Fraction(1)] * n
    for i, winner in enumerate(winners):
        supporters = [v for v in seq.rounds[i].approvers(winner) if weights[v] >= 0]
        debit = Fraction(n, len(supporters))
        weights = [w + 1 - (debit if v in supporters else 0) for v, w in enumerate(weights)]
    return weights


def _brute_force_balancing_round(loads, rnd: DecisionInstance, tb: TieBreaker):
    """Exhaustively minimize the shared load over all approver subsets.

    Returns (winner, chosen voters, new load). Among minimizing subsets the
    smallest one whose (load, voter) signature is lexicographically least is
    taken, which pins the same canonical set as the incremental engine.
    """
    best = None
    for cand in rnd.candidates:
        approvers = rnd.approvers(cand)
        if not approvers:
            raise rules.UnapprovedCandidateError(f"candidate {cand!r} has no approvers")
        for size in range(1, len(approvers) + 1):
            for subset in itertools.combinations(approvers, size):
                value = (1 + sum(loads[v] for v in subset)) / Fraction(size)
                signature = tuple(sorted((loads[v], tb.voter_key(v)) for v in subset))
                key = (value, tb.candidate_key(cand), size, signature)
                if best is None or key < best[0]:
                    best = (key, cand, subset, value)
    _, cand, subset, value = best
    return cand, subset, value


def _naive_balancing_winner(seq: DecisionSequence, upto: int, tb: TieBreaker) -> str:
    loads = [Fraction(0)] * seq.voter_count
    for i in range(upto):
        _, subset, value = _brute_force_balancing_round(loads, seq.rounds[i], tb)
        for v in subset:
            loads[v] = value
    winner, _, _ = _brute_force_balancing_round(loads, seq.rounds[upto], tb)
    return winner


def _naive_pi_pav_weights(seq: DecisionSequence, winners: list[str]) -> list[rules.PiValue]:
    sats = _satisfaction_counts(seq, winners)
    weights = []
    for v in range(seq.voter_count):
        lost = any(winners[i] not in seq.rounds[i].approvals[v] for i in range(len(winners)))
        part = Fraction(1, sats[v] + 1)
        if lost:
            weights.append(rules.PiValue(Fraction(0), part))
        else:
            weights.append(rules.PiValue(part, Fraction(0)))
    return weights


def _pi_argmax(rnd: DecisionInstance, weights, tb: TieBreaker) -> str:
    best = None
    best_score = None
    for cand in rnd.candidates:
        total = rules.PI_ZERO
        for v in rnd.approvers(cand):
            total = total + weights[v]
        if best is None:
            best, best_score = cand, total
            continue
        cmp = rules.compare_pi_values(total, best_score)
        if cmp > 0 or (cmp == 0 and tb.candidate_key(cand) < tb.candidate_key(best)):
            best, best_score = cand, total
    return best


def naive_rule_reference(rule_id: str, seq: DecisionSequence,
                         tb: Optional[TieBreaker] = None) -> ChoiceSequence:
    """Recompute the whole choice sequence from first principles, one round at a time."""
    _check_size(seq)
    if tb is None:
        tb = TieBreaker()
    winners: list[str] = []
    for t in range(len(seq)):
        rnd = seq.rounds[t]
        if rule_id in ("av", "pav", "reset", "exponential"):
            weights = _naive_wam_weights(rule_id, seq, winners)
            winner = _weighted_argmax(rnd, weights, tb)
        elif rule_id == "consensus":
            weights = _naive_consensus_weights(seq, winners)
            winner = _weighted_argmax(rnd, weights, tb, clamp=True)
        elif rule_id == "phragmen":
            winner = _naive_balancing_winner(seq, t, tb)
        elif rule_id in ("dictator", "rotating-dictator"):
            winner = tb.best_candidate(rnd.approvals[t % seq.voter_count])
        elif rule_id == "pi-pav":
            weights = _naive_pi_pav_weights(seq, winners)
            winner = _pi_argmax(rnd, weights, tb)
        else:
            raise rules.UnknownRuleError(rule_id)
        winners.append(winner)
    return ChoiceSequence(tuple(winners))


def _weighted_argmax(rnd: DecisionInstance, weights, tb: TieBreaker, clamp: bool = False) -> str:
    best = None
    best_score = None
    for cand in rnd.candidates:
        total = rules.score(rnd, weights, cand, clamp_negative=clamp)
        if best is None or total > best_score or (
            total == best_score and tb.candidate_key(cand) < tb.candidate_key(best)
        ):
            best, best_score = cand, total
    return best


# --------------------------------------------------------------------------
# witness constructions


def _padded(prefix: str, index: int, width: int = 2) -> str:
    return f"{prefix}{index:0{width}d}"


def reset_dry_spell_construction(n: int) -> tuple[DecisionSequence, TieBreaker, int]:
    """The (2n-2)-round family on which the reset rule starves the last voter.

    Voter n-1 (0-based) approves its own alternative throughout and wins only
    in the final round, for a dry spell of exactly 2n-3. Ties are broken
    toward lower-numbered alternatives, always against that voter.
    """
    if n < 3:
        raise ValueError("the construction needs n >= 3")
    names = tuple(_padded("c", j + 1) for j in range(n))
    tb = TieBreaker(candidate_order=names)
    rounds = []

    def build(approval_of):  # approval_of: 1-based voter -> 1-based alternative
        rows = [{names[approval_of(j) - 1]} for j in range(1, n + 1)]
        return instance(rows, candidates=names)

    for _t in range(1, n):  # disjoint singletons, alternatives 1..n-1 win in order
        rounds.append(build(lambda j: j))
    rounds.append(build(lambda j: 1 if j == n - 1 else j))  # voter n-1 defects to alternative 1
    for i in range(1, n - 2):  # the unanimity cascade toward alternative 1
        rounds.append(build(lambda j, i=i: 1 if j <= i + 1 or j == n - 1 else j))
    rounds.append(build(lambda j: 1 if j <= n - 1 else n))  # final round: voter n wins at last
    seq = sequence(rounds)
    assert len(seq) == 2 * n - 2
    return seq, tb, 2 * n - 3


def expected_reset_construction_weights(n: int) -> list[list[Fraction]]:
    """Closed-form weight rows (entering rounds 1..2n-2) for the family above."""
    if n < 4:
        raise ValueError("the weight table is unambiguous only for n >= 4")
    table = []
    for t in range(1, n + 1):
        table.append([Fraction(t - j) if j < t else Fraction(t) for j in range(1, n + 1)])
    for i in range(1, n - 1):
        t = n + i
        row = []
        for j in range(1, n + 1):
            if j <= i or j == n - 1:
                row.append(Fraction(1))
            elif j == n:
                row.append(Fraction(t))
            else:
                row.append(Fraction(t - j))
        table.append(row)
    return table


def phragmen_dry_spell_construction(n: int) -> tuple[DecisionSequence, TieBreaker, int]:
    """2n rounds of disjoint singletons on which load balancing starves voter n-1.

    Candidate naming puts that voter's alternative first in round one (it wins
    the opening all-tie) and last afterwards, so every later tie goes against
    it until round 2n: a dry spell of exactly 2n-2.
    """
    if n < 2:
        raise ValueError("the construction needs n >= 2")
    others = [_padded("m", j + 1) for j in range(n - 1)]
    first = instance([{others[j]} for j in range(n - 1)] + [{"a"}])
    later = instance([{others[j]} for j in range(n - 1)] + [{"z"}])
    seq = sequence([first] + [later] * (2 * n - 1))
    return seq, TieBreaker(), 2 * n - 2


def pav_dry_spell_construction(k: int) -> tuple[DecisionSequence, ChoiceSequence, int]:
    """The 3k-round family with an alternating phase then k rounds that starve voter 2."""
    if k < 1:
        raise ValueError("k must be >= 1")
    odd = instance([{"a"}, {"b"}, {"a"}], candidates=("a", "b"))
    even = instance([{"a"}, {"b"}, {"b"}], candidates=("a", "b"))
    tail = instance([{"a"}, {"a"}, {"c"}], candidates=("a", "c"))
    seq = sequence([odd, even] * k + [tail] * k)
    expected = ChoiceSequence(tuple(["a", "b"] * k + ["a"] * k))
    return seq, expected, k


def av_dry_spell_construction(length: int) -> tuple[DecisionSequence, int]:
    """Plain approval voting never satisfies voter 2 here, for any horizon."""
    return repeat_profile([{"a"}, {"a"}, {"b"}], length), length


def dictator_rounds_construction(n: int, d: int) -> DecisionSequence:
    """First each voter wins once on disjoint singletons; then d rounds where
    exactly one voter backs the winner while everyone else shares a common
    alternative, which any rule with the optimal dry-spell guarantee must follow."""
    if n < 2:
        raise ValueError("needs n >= 2")
    names = tuple(_padded("c", j) for j in range(n))
    rounds = [instance([{names[j]} for j in range(n)], candidates=names)]
    rounds = rounds * n
    for r in range(n, n + d):
        rows = [{names[0]} if j == r % n else {names[1]} for j in range(n)]
        rounds.append(instance(rows, candidates=names))
    return sequence(rounds)


# --------------------------------------------------------------------------
# enumeration


@dataclass(frozen=True)
class EnumerationSpace:
    """A finite, deterministically ordered family of decision sequences."""

    voters: int
    rounds: int
    candidates: int
    max_approval_size: Optional[int] = None
    simple_only: bool = False
    canonical_only: bool = False


def partitions(n: int) -> Iterator[tuple[int, ...]]:
    """Integer partitions of n, parts non-increasing, in descending lexicographic order."""

    def rec(remaining, cap):
        if remaining == 0:
            yield ()
            return
        for first in range(min(remaining, cap), 0, -1):
            for rest in rec(remaining - first, first):
                yield (first,) + rest

    yield from rec(n, n)


def _approval_options(names, max_size):
    limit = max_size or len(names)
    options = []
    for size in range(1, limit + 1):
        options.extend(frozenset(c) for c in itertools.combinations(names, size))
    return options


def _renaming_key(seq: DecisionSequence, perm: dict) -> tuple:
    return tuple(
        tuple(tuple(sorted(perm[c] for c in approval)) for approval in rnd.approvals)
        for rnd in seq.rounds
    )


def _is_canonical(seq: DecisionSequence, names) -> bool:
    base = _renaming_key(seq, {c: c for c in names})
    for perm_names in itertools.permutations(names):
        perm = dict(zip(names, perm_names))
        if _renaming_key(seq, perm) < base:
            return False
    return True


def enumerate_sequences(space: EnumerationSpace) -> Iterator[DecisionSequence]:
    """Deterministic stream over the space (optionally one per candidate-renaming orbit)."""
    if space.simple_only:
        for part in partitions(space.voters):
            yield simple_sequence(part, space.rounds)
        return
    names = candidate_letters(space.candidates)
    options = _approval_options(names, space.max_approval_size)
    profiles = [
        instance(rows, candidates=names)
        for rows in itertools.product(options, repeat=space.voters)
    ]
    for rounds in itertools.product(profiles, repeat=space.rounds):
        seq = DecisionSequence(space.voters, rounds)
        if space.canonical_only and not _is_canonical(seq, names):
            continue
        yield seq


def prune_unapproved_candidates(seq: DecisionSequence) -> DecisionSequence:
    """Drop candidates nobody approves (load balancing rejects them outright)."""
    rounds = []
    for rnd in seq.rounds:
        approved = set().union(*rnd.approvals)
        kept = tuple(c for c in rnd.candidates if c in approved)
        rounds.append(DecisionInstance(kept, rnd.approvals))
    return DecisionSequence(seq.voter_count, tuple(rounds))


# --------------------------------------------------------------------------
# the corpus


@dataclass(frozen=True)
class CorpusEntry:
    """One construction with a recorded outcome, re-checkable by replay."""

    entry_id: str
    rule_id: str
    build: Callable[[], tuple[DecisionSequence, Optional[TieBreaker]]]
    check: Callable[[rules.RuleRun, DecisionSequence], Optional[str]]
    note: str
    expected_choices: Optional[tuple[str, ...]] = None

    def verify(self) -> None:
        seq, tb = self.build()
        run = rules.run_rule(self.rule_id, seq, tb)
        if self.expected_choices is not None and run.winners != self.expected_choices:
            raise CorpusVerificationError(
                f"{self.entry_id}: expected {self.expected_choices}, got {run.winners}"
            )
        problem = self.check(run, seq)
        if problem:
            raise CorpusVerificationError(f"{self.entry_id}: {problem}")


def _ok(run, seq):
    return None


def _dry_spell_check(voter: int, expected: int):
    def check(run, seq):
        spell = max_dry_spell(history(seq, run.winners), voter)
        if spell != expected:
            return f"voter {voter} dry spell {spell}, expected {expected}"
        return None

    return check


def _choices(*winners):
    return tuple(winners)


def _golden_entries() -> list[CorpusEntry]:
    entries = []

    def add(entry_id, rule_id, build, expected=None, check=_ok, note=""):
        entries.append(CorpusEntry(entry_id, rule_id, build, check, note, expected))

    add(
        "av-two-one",
        "av",
        lambda: (repeat_profile([{"a"}, {"a"}, {"b"}], 3), None),
        expected=_choices("a", "a", "a"),
        note="majority locks out the minority voter forever",
    )
    add(
        "reset-majority-three-singles",
        "reset",
        lambda: (repeat_profile([{"a"}, {"a"}, {"a"}, {"b"}, {"c"}, {"d"}], 6), None),
        expected=_choices("a", "a", "a", "b", "a", "c"),
        note="reset overshoots the three-voter bloc's fair share",
    )
    add(
        "exponential-four-one",
        "exponential",
        lambda: (repeat_profile([{"a"}, {"a"}, {"a"}, {"a"}, {"b"}], 5), None),
        expected=_choices("a", "a", "b", "a", "b"),
        note="the lone voter wins twice out of five",
    )
    add(
        "pav-three-one",
        "pav",
        lambda: (repeat_profile([{"a"}, {"a"}, {"a"}, {"b"}], 4), None),
        expected=_choices("a", "a", "a", "b"),
        note="proportional outcome before any insertion",
    )
    add(
        "pav-insertion-shift",
        "pav",
        lambda: (
            sequence(
                [instance([{"c"}] * 4)]
                + list(repeat_profile([{"a"}, {"a"}, {"a"}, {"b"}], 4).rounds)
            ),
            None,
        ),
        expected=_choices("c", "a", "a", "a", "a"),
        note="a unanimous round prepended to pav-three-one flips the last round",
    )
    add(
        "reset-two-one",
        "reset",
        lambda: (repeat_profile([{"a"}, {"a"}, {"b"}], 3), None),
        expected=_choices("a", "a", "b"),
        note="reset's run before any insertion",
    )
    add(
        "reset-insertion-shift",
        "reset",
        lambda: (
            sequence(
                list(repeat_profile([{"a"}, {"a"}, {"b"}], 2).rounds)
                + [instance([{"c"}] * 3)]
                + list(repeat_profile([{"a"}, {"a"}, {"b"}], 1).rounds)
            ),
            None,
        ),
        expected=_choices("a", "a", "c", "a"),
        note="a unanimous round inserted before the third flips it",
    )
    add(
        "consensus-two-one",
        "consensus",
        lambda: (repeat_profile([{"a"}, {"a"}, {"b"}], 3), None),
        expected=_choices("a", "b", "a"),
        note="the minority voter is served in round two",
    )
    add(
        "phragmen-seven-voters-warmup",
        "phragmen",
        lambda: (repeat_profile([{"a"}] * 3 + [{"b"}] * 3 + [{"c"}], 2), None),
        expected=_choices("a", "b"),
        check=_phragmen_warmup_loads,
        note="two warmup rounds with loads (1/3,1/3,1/3,1/3,1/3,1/3,0)",
    )
    for n in range(3, 9):
        add(
            f"reset-dry-spell-n{n}",
            "reset",
            lambda n=n: reset_dry_spell_construction(n)[:2],
            check=_dry_spell_check(n - 1, 2 * n - 3),
            note=f"tight reset starvation family, spell 2n-3 = {2 * n - 3}",
        )
    for n in range(2, 7):
        add(
            f"phragmen-dry-spell-n{n}",
            "phragmen",
            lambda n=n: phragmen_dry_spell_construction(n)[:2],
            check=_dry_spell_check(n - 1, 2 * n - 2),
            note=f"tight load-balancing starvation family, spell 2n-2 = {2 * n - 2}",
        )
    for k in range(1, 4):
        seq, expected, spell = pav_dry_spell_construction(k)
        add(
            f"pav-dry-spell-k{k}",
            "pav",
            lambda k=k: (pav_dry_spell_construction(k)[0], None),
            expected=expected.winners,
            check=_dry_spell_check(2, spell),
            note="a long winning streak buys voter 2 an arbitrarily long drought",
        )
    return entries


def _phragmen_warmup_loads(run, seq):
    third = Fraction(1, 3)
    expected_first = (third,) * 3 + (Fraction(0),) * 4
    expected_second = (third,) * 6 + (Fraction(0),)
    if run.states[1]["loads"] != expected_first:
        return f"round-1 loads {run.states[1]['loads']}"
    if run.states[2]["loads"] != expected_second:
        return f"round-2 loads {run.states[2]['loads']}"
    return None


CORPUS: list[CorpusEntry] = _golden_entries()


def corpus_entry(entry_id: str) -> CorpusEntry:
    for entry in CORPUS:
        if entry.entry_id == entry_id:
            return entry
    raise KeyError(entry_id)


def verify_corpus() -> list[str]:
    """Replay every corpus entry; any mismatch is a build-breaking failure."""
    verified = []
    for entry in CORPUS:
        entry.verify()
        verified.append(entry.entry_id)
    return verified
