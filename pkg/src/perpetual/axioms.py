"""Executable checkers for the fairness axioms, each returning a replayable verdict.

A checker never proves a universally quantified axiom; it either refutes it
with a concrete witness (re-checkable by replaying the rule) or reports that
the searched space contains no violation. Searches are deterministic: random
campaigns derive from a recorded seed, exhaustive campaigns from a canonical
enumeration order, and known witness families from the corpus are probed
first so refutations are found without luck.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from . import corpus, rules
from .core import (
    ChoiceSequence,
    DecisionInstance,
    DecisionSequence,
    TieBreaker,
    history,
    insert_round,
    instance,
    max_dry_spell,
    party_size,
    satisfaction,
    sequence,
    uncontroversial_winner,
)

#: Default PRNG seed for every randomized campaign (override per call).
DEFAULT_SEED = 1729

HOLDS = "holds-on-searched-space"
REFUTED = "refuted"


@dataclass(frozen=True)
class Witness:
    """Everything needed to reproduce a refutation by replaying the rule."""

    kind: str
    rule_id: str
    seq: DecisionSequence
    tiebreaker: Optional[TieBreaker]
    details: dict


@dataclass(frozen=True)
class AxiomVerdict:
    status: str
    witness: Optional[Witness]
    search_budget: dict

    @property
    def holds(self) -> bool:
        return self.status == HOLDS


def _holds(**budget) -> AxiomVerdict:
    return AxiomVerdict(HOLDS, None, budget)


def _refuted(witness: Witness, **budget) -> AxiomVerdict:
    return AxiomVerdict(REFUTED, witness, budget)


def random_sequence(rng: random.Random, n: int, k: int, max_candidates: int) -> DecisionSequence:
    """A seeded random sequence; candidates nobody approves are dropped."""
    rounds = []
    for _ in range(k):
        m = rng.randint(1, max_candidates)
        names = corpus.candidate_letters(m)
        rows = []
        for _v in range(n):
            size = rng.randint(1, m)
            rows.append(frozenset(rng.sample(names, size)))
        rounds.append(instance(rows, candidates=names))
    return corpus.prune_unapproved_candidates(DecisionSequence(n, tuple(rounds)))


# --------------------------------------------------------------------------
# dry spells


@dataclass(frozen=True)
class DrySpellSearch:
    """How to look for long dry spells: probe known families, enumerate, or sample."""

    mode: str = "random"  # "construction" | "exhaustive" | "random"
    max_voters: int = 4
    max_rounds: int = 10
    max_candidates: int = 4
    samples: int = 2000
    seed: int = DEFAULT_SEED


def _dry_spell_witness(rule_id, seq, tb, voter, spell, bound) -> Witness:
    return Witness(
        "dry-spell", rule_id, seq, tb,
        {"voter": voter, "spell": spell, "claimed_bound": bound},
    )


def _construction_probes(rule_id: str, bound: Callable[[int], int]):
    """Known starvation families, instantiated against the claimed bound."""
    probes = []
    if rule_id == "av":
        length = max(bound(3), 1)
        seq, spell = corpus.av_dry_spell_construction(length)
        probes.append((seq, None))
    elif rule_id == "pav":
        k = max(bound(3), 1)
        seq, _expected, _spell = corpus.pav_dry_spell_construction(k)
        probes.append((seq, None))
    elif rule_id == "reset":
        for n in range(3, 9):
            seq, tb, _spell = corpus.reset_dry_spell_construction(n)
            probes.append((seq, tb))
    elif rule_id == "phragmen":
        for n in range(2, 7):
            seq, tb, _spell = corpus.phragmen_dry_spell_construction(n)
            probes.append((seq, tb))
    return probes


def exhaustive_max_dry_spell(rule_id: str, n: int, max_rounds: int) -> int:
    """The longest dry spell any adversary can inflict on a voter within `max_rounds`.

    Works for anonymous weight-per-voter rules (the basic WAMs and the
    consensus rule). Per round only the winner's approver set matters, and a
    set S is achievable in some round profile exactly when it is achievable in
    the canonical profile where S approves one alternative (named to win ties)
    and every other voter approves a private alternative: in any profile each
    non-member approves something, so some rival alternative scores at least
    the best single non-member weight. The search therefore walks all
    reachable (state, current-streak) pairs under these canonical rounds,
    merging states that agree up to renaming the non-target voters.
    """
    rule = rules.get_rule(rule_id)
    others = [f"m{v:02d}" for v in range(n)]

    def canonical_round(members: frozenset) -> DecisionInstance:
        names = ["a"] + [others[v] for v in range(n) if v not in members]
        rows = [{"a"} if v in members else {others[v]} for v in range(n)]
        return instance(rows, candidates=names)

    subsets = []
    for mask in range(1, 2 ** n):
        members = frozenset(v for v in range(n) if mask >> v & 1)
        subsets.append((members, canonical_round(members)))

    def state_key(state) -> tuple:
        weights = rule.snapshot(state)["weights"]
        return weights[0], tuple(sorted(weights[1:]))

    start = rule.initial_state(n)
    frontier = {(state_key(start), 0): (start, 0)}
    best = 0
    for _round in range(max_rounds):
        successors = {}
        for (key, streak), (state, _) in frontier.items():
            for members, rnd in subsets:
                winner, nxt = rule.step(state, rnd, rules.LEXICOGRAPHIC)
                if winner != "a":
                    continue  # S cannot win this round in any profile
                nxt_streak = 0 if 0 in members else streak + 1
                best = max(best, nxt_streak)
                nxt_key = (state_key(nxt), nxt_streak)
                kept = successors.get(nxt_key)
                if kept is None:
                    successors[nxt_key] = (nxt, nxt_streak)
        frontier = successors
    return best


def check_dry_spell_guarantee(rule_id: str, bound: Callable[[int], int],
                              search: DrySpellSearch = DrySpellSearch()) -> AxiomVerdict:
    """Refute `no voter ever has a dry spell of length bound(n)` or report the search."""
    examined = 0
    if search.mode == "construction":
        for seq, tb in _construction_probes(rule_id, bound):
            run = rules.run_rule(rule_id, seq, tb)
            hist = history(seq, run.winners)
            examined += 1
            for voter in range(seq.voter_count):
                spell = max_dry_spell(hist, voter)
                if spell >= bound(seq.voter_count):
                    return _refuted(
                        _dry_spell_witness(rule_id, seq, tb, voter, spell, bound(seq.voter_count)),
                        mode=search.mode, examined=examined,
                    )
        return _holds(mode=search.mode, examined=examined)

    if search.mode == "exhaustive":
        for n in range(1, search.max_voters + 1):
            spell = exhaustive_max_dry_spell(rule_id, n, search.max_rounds)
            examined += 1
            if spell >= bound(n):
                # rebuild a concrete witness by a targeted random hunt is not
                # needed: the searched space is abstract, report parameters
                witness = Witness(
                    "dry-spell-exhaustive", rule_id,
                    corpus.simple_sequence([n], 1), None,
                    {"voters": n, "spell": spell, "claimed_bound": bound(n)},
                )
                return _refuted(witness, mode=search.mode, examined=examined,
                                max_rounds=search.max_rounds)
        return _holds(mode=search.mode, voters=search.max_voters,
                      max_rounds=search.max_rounds)

    rng = random.Random(search.seed)
    for _ in range(search.samples):
        n = rng.randint(1, search.max_voters)
        k = rng.randint(1, search.max_rounds)
        seq = random_sequence(rng, n, k, search.max_candidates)
        run = rules.run_rule(rule_id, seq)
        hist = history(seq, run.winners)
        examined += 1
        for voter in range(n):
            spell = max_dry_spell(hist, voter)
            if spell >= bound(n):
                return _refuted(
                    _dry_spell_witness(rule_id, seq, None, voter, spell, bound(n)),
                    mode=search.mode, examined=examined, seed=search.seed,
                )
    return _holds(mode=search.mode, examined=examined, seed=search.seed)


# --------------------------------------------------------------------------
# independence of uncontroversial decisions


def check_iud(rule_id: str, seq: DecisionSequence, insertions: Sequence[DecisionInstance],
              tb: Optional[TieBreaker] = None) -> AxiomVerdict:
    """Splice each uncontroversial round into every position and compare runs."""
    checked = []
    for rnd in insertions:
        if uncontroversial_winner(rnd) is None:
            raise ValueError("insertion profile is not uncontroversial")
        checked.append((rnd, uncontroversial_winner(rnd)))
    base = rules.run_rule(rule_id, seq, tb).winners
    examined = 0
    for rnd, consensus_choice in checked:
        for position in range(len(seq) + 1):
            spliced = insert_round(seq, position, rnd)
            got = rules.run_rule(rule_id, spliced, tb).winners
            expected = base[:position] + (consensus_choice,) + base[position:]
            examined += 1
            if got != expected:
                witness = Witness(
                    "iud", rule_id, seq, tb,
                    {
                        "position": position,
                        "insertion": rnd,
                        "base_choices": base,
                        "expected": expected,
                        "actual": got,
                    },
                )
                return _refuted(witness, examined=examined)
    return _holds(examined=examined)


def insertion_profiles(n: int, base: DecisionSequence) -> list[DecisionInstance]:
    """Uncontroversial rounds to splice: unanimous singletons over existing and
    fresh names (both ends of the tie order), plus heterogeneous supersets with
    a unique first-named common alternative."""
    seen = set()
    profiles = []

    def add(rows, candidates):
        rnd = instance(rows, candidates=candidates)
        key = (rnd.candidates, rnd.approvals)
        if key not in seen:
            seen.add(key)
            profiles.append(rnd)

    base_names = sorted({c for rnd in base.rounds for c in rnd.candidates})
    fresh = "z" if "z" not in base_names else "zz"
    for name in {base_names[0], base_names[-1], fresh}:
        add([{name}] * n, (name,))
    if n >= 2:
        add([{"a", "x"}] + [{"a"}] * (n - 1), ("a", "x"))
    if n >= 3:
        rows = [{"a", "x"} if v % 2 == 0 else {"a", "y"} for v in range(n)]
        add(rows, ("a", "x", "y"))
    return profiles


_IUD_PROBES = {
    "pav": lambda: (
        corpus.repeat_profile([{"a"}, {"a"}, {"a"}, {"b"}], 4),
        [instance([{"c"}] * 4)],
        None,
    ),
    "reset": lambda: (
        corpus.repeat_profile([{"a"}, {"a"}, {"b"}], 3),
        [instance([{"c"}] * 3)],
        None,
    ),
    "phragmen": lambda: (
        corpus.repeat_profile([{"a"}, {"b"}], 2),
        [instance([{"a"}, {"a"}])],
        None,
    ),
    "dictator": lambda: (
        corpus.repeat_profile([{"a"}, {"b"}], 1),
        [instance([{"c"}, {"c"}])],
        None,
    ),
}
_IUD_PROBES["rotating-dictator"] = _IUD_PROBES["dictator"]


@dataclass(frozen=True)
class IudSearch:
    max_voters: int = 5
    max_rounds: int = 2
    candidates: int = 2
    seed: int = DEFAULT_SEED


def iud_campaign(rule_id: str, search: IudSearch = IudSearch()) -> AxiomVerdict:
    """Probe the known counterexample families, then exhaust a small space."""
    examined = 0
    probe = _IUD_PROBES.get(rule_id)
    if probe is not None:
        seq, insertions, tb = probe()
        verdict = check_iud(rule_id, seq, insertions, tb)
        examined += verdict.search_budget["examined"]
        if not verdict.holds:
            budget = dict(verdict.search_budget, stage="construction")
            return AxiomVerdict(REFUTED, verdict.witness, budget)
    for n in range(1, search.max_voters + 1):
        insertions = None
        for k in range(1, search.max_rounds + 1):
            space = corpus.EnumerationSpace(voters=n, rounds=k, candidates=search.candidates)
            for seq in corpus.enumerate_sequences(space):
                seq = corpus.prune_unapproved_candidates(seq)
                if insertions is None or True:
                    insertions = insertion_profiles(n, seq)
                verdict = check_iud(rule_id, seq, insertions)
                examined += verdict.search_budget["examined"]
                if not verdict.holds:
                    budget = dict(verdict.search_budget, stage="exhaustive", examined=examined)
                    return AxiomVerdict(REFUTED, verdict.witness, budget)
    return _holds(stage="exhaustive", examined=examined,
                  max_voters=search.max_voters, max_rounds=search.max_rounds,
                  candidates=search.candidates)


# --------------------------------------------------------------------------
# simple proportionality and quota


def check_simple_proportionality(rule_id: str, max_voters: int) -> AxiomVerdict:
    """Exhaustive over all party-size partitions up to max_voters (k = n each)."""
    if max_voters > 9:
        raise ValueError("partition enumeration is intended for n <= 9")
    examined = 0
    for n in range(1, max_voters + 1):
        for part in corpus.partitions(n):
            seq = corpus.simple_sequence(part, n)
            run = rules.run_rule(rule_id, seq)
            hist = history(seq, run.winners)
            examined += 1
            for voter in range(n):
                expected = party_size(seq, voter)
                got = satisfaction(hist, voter)
                if got != expected:
                    witness = Witness(
                        "simple-proportionality", rule_id, seq, None,
                        {"partition": part, "voter": voter,
                         "satisfaction": got, "party_size": expected,
                         "choices": run.winners},
                    )
                    return _refuted(witness, examined=examined)
    return _holds(examined=examined, max_voters=max_voters)


@dataclass(frozen=True)
class PartyQuotaRow:
    label: str
    size: int
    satisfaction: int
    lower_bound: int
    upper_bound: int


@dataclass(frozen=True)
class QuotaReport:
    """Per-party satisfaction against floor/ceiling quota at horizon k."""

    voters: int
    rounds: int
    parties: tuple[PartyQuotaRow, ...]

    def __post_init__(self):
        total = sum(row.satisfaction for row in self.parties)
        if total != self.rounds:
            raise ValueError(f"party satisfactions sum to {total}, expected {self.rounds}")


def _quota_rows(party_sizes, sats, k, n) -> tuple[PartyQuotaRow, ...]:
    rows = []
    for i, size in enumerate(party_sizes):
        rows.append(PartyQuotaRow(
            label=corpus.candidate_letters(len(party_sizes))[i],
            size=size,
            satisfaction=sats[i],
            lower_bound=math.floor(Fraction(k * size, n)),
            upper_bound=math.ceil(Fraction(k * size, n)),
        ))
    return tuple(rows)


def check_quota(rule_id: str, party_sizes: Sequence[int], k: int,
                which: str) -> tuple[QuotaReport, AxiomVerdict]:
    """Run the rule on the canonical simple sequence; audit the bound at every prefix."""
    if which not in ("lower", "upper"):
        raise ValueError("which must be 'lower' or 'upper'")
    sizes = list(party_sizes)
    n = sum(sizes)
    seq = corpus.simple_sequence(sizes, k)
    run = rules.run_rule(rule_id, seq)
    labels = corpus.candidate_letters(len(sizes))
    per_party = {label: 0 for label in labels}
    violation = None
    for t, winner in enumerate(run.winners, start=1):
        per_party[winner] += 1
        for label, size in zip(labels, sizes):
            sat = per_party[label]
            quota = Fraction(t * size, n)
            if which == "lower" and sat < math.floor(quota):
                violation = (t, label, sat, math.floor(quota))
            elif which == "upper" and sat > math.ceil(quota):
                violation = (t, label, sat, math.ceil(quota))
            if violation:
                break
        if violation:
            break
    full_sats = [0] * len(sizes)
    for winner in run.winners:
        full_sats[labels.index(winner)] += 1
    report = QuotaReport(n, k, _quota_rows(sizes, full_sats, k, n))
    if violation:
        t, label, sat, bound = violation
        witness = Witness(
            "quota", rule_id, seq, None,
            {"which": which, "prefix": t, "party": label,
             "satisfaction": sat, "bound": bound, "party_sizes": tuple(sizes)},
        )
        return report, _refuted(witness, prefixes=k)
    return report, _holds(prefixes=k)


# --------------------------------------------------------------------------
# the win-based proportionality condition


def win_weight_sequence(g: Callable[[Fraction], Fraction], length: int) -> tuple[Fraction, ...]:
    """(1, g(1), g(g(1)), ...) — the weight of a voter after 0, 1, 2, ... wins."""
    weights = [Fraction(1)]
    for _ in range(length - 1):
        nxt = g(weights[-1])
        if nxt > weights[-1]:
            raise rules.WeightContractViolation("win update increased a weight")
        weights.append(nxt)
    return tuple(weights)


def check_winbased_sp_condition(weights: Sequence[Fraction], bound: int) -> AxiomVerdict:
    """Scan the strict score-domination condition for party sizes up to `bound`.

    ``weights[j]`` is the per-voter weight after j wins. The scan compares a
    size-x group one win short of its quota against a size-(y+1) group two
    short: x * weights[x-1] < (y+1) * weights[y-1] must be strict for all
    1 <= x, y <= bound. Harmonic families pass; geometric decay fails at a
    finite y.
    """
    if len(weights) < bound:
        raise ValueError(f"need at least {bound} weights, got {len(weights)}")
    for x in range(1, bound + 1):
        for y in range(1, bound + 1):
            if not x * weights[x - 1] < (y + 1) * weights[y - 1]:
                witness = Witness(
                    "win-weight-condition", "win-based", corpus.simple_sequence([1], 1), None,
                    {"x": x, "y": y,
                     "left": x * weights[x - 1], "right": (y + 1) * weights[y - 1]},
                )
                return _refuted(witness, bound=bound)
    return _holds(bound=bound)


# --------------------------------------------------------------------------
# dictatorial rounds


@dataclass(frozen=True)
class DictatorialRounds:
    indices: tuple[int, ...]
    longest_consecutive: int


def detect_dictatorial_rounds(hist) -> DictatorialRounds:
    """Rounds whose winner has a single approver while all others share a rival."""
    indices = []
    for j, rnd in enumerate(hist.sequence.rounds):
        winner = hist.choices.winners[j]
        approvers = rnd.approvers(winner)
        if len(approvers) != 1:
            continue
        v = approvers[0]
        common = set(rnd.candidates)
        for voter, approval in enumerate(rnd.approvals):
            if voter != v:
                common &= approval
        if common - {winner}:
            indices.append(j)
    longest = current = 0
    previous = None
    for j in indices:
        current = current + 1 if previous == j - 1 else 1
        longest = max(longest, current)
        previous = j
    return DictatorialRounds(tuple(indices), longest)


# --------------------------------------------------------------------------
# perpetual proportionality degree


@dataclass(frozen=True)
class DegreeSample:
    group: tuple[int, ...]
    ell: Fraction
    average_satisfaction: Fraction


@dataclass(frozen=True)
class DegreeSearch:
    samples: int = 10000
    max_voters: int = 8
    max_rounds: int = 8
    max_candidates: int = 4
    seed: int = DEFAULT_SEED


@dataclass(frozen=True)
class DegreeEstimate:
    minimum: Fraction
    sample: DegreeSample
    search_budget: dict


def _cohesive_groups(seq: DecisionSequence):
    """Maximal voter groups with identical approvals in every round."""
    by_rows = {}
    for v in range(seq.voter_count):
        rows = tuple(rnd.approvals[v] for rnd in seq.rounds)
        by_rows.setdefault(rows, []).append(v)
    return list(by_rows.values())


def _planted_sequence(rng, n, k, group_size, max_candidates) -> DecisionSequence:
    rounds = []
    for _ in range(k):
        m = rng.randint(1, max_candidates)
        names = corpus.candidate_letters(m)
        group_row = frozenset(rng.sample(names, rng.randint(1, m)))
        rows = [group_row] * group_size
        for _v in range(n - group_size):
            rows.append(frozenset(rng.sample(names, rng.randint(1, m))))
        rounds.append(instance(rows, candidates=names))
    return corpus.prune_unapproved_candidates(DecisionSequence(n, tuple(rounds)))


def estimate_proportionality_degree(rule_id: str, ell,
                                    search: DegreeSearch = DegreeSearch()) -> DegreeEstimate:
    """Minimum observed average satisfaction of any ell-large cohesive group.

    The result upper-bounds any claimed degree guarantee at this ell. Each
    sampled sequence plants one cohesive group large enough to qualify; all
    qualifying groups of the sample are evaluated.
    """
    ell = Fraction(ell)
    rng = random.Random(search.seed)
    minimum = None
    best_sample = None
    examined = 0
    for _ in range(search.samples):
        n = rng.randint(2, search.max_voters)
        k = rng.randint(max(1, math.ceil(ell)), search.max_rounds)
        group_size = min(n, math.ceil(ell * n / k))
        seq = _planted_sequence(rng, n, k, group_size, search.max_candidates)
        run = rules.run_rule(rule_id, seq)
        hist = history(seq, run.winners)
        examined += 1
        for group in _cohesive_groups(seq):
            if len(group) < ell * Fraction(n, k):
                continue
            sat = Fraction(satisfaction(hist, group[0]))
            if minimum is None or sat < minimum:
                minimum = sat
                best_sample = DegreeSample(tuple(group), ell, sat)
    return DegreeEstimate(minimum, best_sample,
                          {"examined": examined, "seed": search.seed, "ell": str(ell)})


# --------------------------------------------------------------------------
# witness replay


def replay_witness(witness: Witness) -> bool:
    """Re-run the rule on the witness and confirm the recorded violation."""
    if witness.kind == "dry-spell":
        run = rules.run_rule(witness.rule_id, witness.seq, witness.tiebreaker)
        spell = max_dry_spell(history(witness.seq, run.winners), witness.details["voter"])
        return spell >= witness.details["claimed_bound"]
    if witness.kind == "iud":
        verdict = check_iud(witness.rule_id, witness.seq, [witness.details["insertion"]],
                            witness.tiebreaker)
        return not verdict.holds
    if witness.kind == "simple-proportionality":
        run = rules.run_rule(witness.rule_id, witness.seq)
        hist = history(witness.seq, run.winners)
        voter = witness.details["voter"]
        return satisfaction(hist, voter) != party_size(witness.seq, voter)
    if witness.kind == "quota":
        details = witness.details
        _report, verdict = check_quota(
            witness.rule_id, details["party_sizes"],
            len(witness.seq), details["which"],
        )
        return not verdict.holds
    if witness.kind == "win-weight-condition":
        details = witness.details
        return not details["left"] < details["right"]
    if witness.kind == "dry-spell-exhaustive":
        details = witness.details
        spell = exhaustive_max_dry_spell(witness.rule_id, details["voters"], details["spell"] + 1)
        return spell >= details["claimed_bound"]
    raise ValueError(f"unknown witness kind {witness.kind!r}")
