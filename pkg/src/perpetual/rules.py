"""The perpetual voting rules, stepped round by round under exact arithmetic.

Weighted approval methods (WAMs) pick the candidate with the highest sum of
per-voter weights over its approvers. Basic WAMs update a voter's weight only
from its previous weight and whether the voter approved the winner, via a
loser function f and a winner function g. On top of those this module
implements the consensus rule (signed weights, the winners jointly pay n),
sequential load balancing (each round distributes one unit of load), the
rotating dictator, and the pi-marked variant of proportional approval voting
used to probe the limits of the lower-quota characterization.

Every rule is exposed through a small class with ``initial_state`` / ``step``
and through the ``run_rule`` driver, which records a full per-round state
trace for auditing. All arithmetic uses ``fractions.Fraction``; state
invariants (weight conservation, load conservation, round encoding) are
asserted on every step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .core import (
    ChoiceSequence,
    DecisionInstance,
    DecisionSequence,
    InvariantViolation,
    LEXICOGRAPHIC,
    TieBreaker,
)

ONE = Fraction(1)


class WeightContractViolation(ValueError):
    """A basic WAM's update functions broke g(x) <= x <= f(x) on a reachable weight."""


class UndefinedWeightError(ValueError):
    """The exponential rule's round decoder was called on a weight it cannot classify."""


class UnapprovedCandidateError(ValueError):
    """Load balancing requires every candidate to have at least one approver."""


class IndeterminatePiComparison(RuntimeError):
    """A pi-valued score comparison could not be decided at the configured precision."""


# --------------------------------------------------------------------------
# scoring


def score(rnd: DecisionInstance, weights, candidate: str, clamp_negative: bool = False) -> Fraction:
    """Sum of the weights of the candidate's approvers (negatives clamped to 0 on request)."""
    if len(weights) != rnd.voter_count:
        raise ValueError("one weight per voter required")
    if candidate not in rnd.candidates:
        raise ValueError(f"candidate {candidate!r} not in this round")
    total = Fraction(0)
    for voter, approval in enumerate(rnd.approvals):
        if candidate in approval:
            w = weights[voter]
            if clamp_negative and w < 0:
                w = Fraction(0)
            total += w
    return total


def _argmax_candidate(rnd: DecisionInstance, value: Callable[[str], object], tb: TieBreaker) -> str:
    best = None
    best_value = None
    for cand in rnd.candidates:
        v = value(cand)
        if best is None or v > best_value or (v == best_value and tb.candidate_key(cand) < tb.candidate_key(best)):
            best, best_value = cand, v
    return best


# --------------------------------------------------------------------------
# basic WAMs


@dataclass(frozen=True)
class WamState:
    weights: tuple[Fraction, ...]
    round_index: int  # rounds already decided


@dataclass(frozen=True)
class BasicWamSpec:
    """A basic WAM given by its loser update f and winner update g.

    ``enforce_monotone`` checks g(x) <= x <= f(x) on every reachable weight;
    it is switched off only for the exponential rule, whose published g
    raises round-1 weights (1 -> 3/2) while still demoting winners relative
    to losers.
    """

    rule_id: str
    f: Callable[[Fraction], Fraction]
    g: Callable[[Fraction], Fraction]
    enforce_monotone: bool = True

    def initial_state(self, n: int) -> WamState:
        return WamState((ONE,) * n, 0)


def step_basic_wam(spec: BasicWamSpec, state: WamState, rnd: DecisionInstance,
                   tb: TieBreaker = LEXICOGRAPHIC) -> tuple[str, WamState]:
    """Pick the weighted-approval winner, then apply g to its approvers and f to the rest."""
    if len(state.weights) != rnd.voter_count:
        raise ValueError("state arity does not match the round")
    winner = _argmax_candidate(rnd, lambda c: score(rnd, state.weights, c), tb)
    new_weights = []
    for voter, approval in enumerate(rnd.approvals):
        w = state.weights[voter]
        updated = spec.g(w) if winner in approval else spec.f(w)
        if spec.enforce_monotone:
            if winner in approval and updated > w:
                raise WeightContractViolation(f"{spec.rule_id}: g({w}) = {updated} > {w}")
            if winner not in approval and updated < w:
                raise WeightContractViolation(f"{spec.rule_id}: f({w}) = {updated} < {w}")
        new_weights.append(updated)
    return winner, WamState(tuple(new_weights), state.round_index + 1)


def av_spec() -> BasicWamSpec:
    identity = lambda x: x
    return BasicWamSpec("av", identity, identity)


def pav_spec() -> BasicWamSpec:
    return BasicWamSpec("pav", lambda x: x, lambda x: x / (x + 1))


def reset_spec() -> BasicWamSpec:
    return BasicWamSpec("reset", lambda x: x + 1, lambda x: ONE)


# --------------------------------------------------------------------------
# exponential rule


def exponential_r(x: Fraction) -> int:
    """Decode the round index k from a weight of the form (2k-1)/2**l.

    Any other input is a hard error; such weights never occur along a run of
    the exponential rule.
    """
    x = Fraction(x)
    if x <= 0:
        raise UndefinedWeightError(f"r({x}) undefined: weight not positive")
    num, den = x.numerator, x.denominator
    if num % 2 == 0 or den & (den - 1) != 0:
        raise UndefinedWeightError(f"r({x}) undefined: not of the form (2k-1)/2**l")
    return (num + 1) // 2


def exponential_update(x: Fraction, won: bool) -> Fraction:
    """One exponential-rule weight update; the new numerator is the next odd number."""
    r = exponential_r(x)
    factor = Fraction(2 * r + 1, 2 * r - 1)
    if won:
        factor /= 2 ** math.factorial(r)
    result = x * factor
    if result.numerator != 2 * r + 1 or (result.denominator & (result.denominator - 1)) != 0:
        raise InvariantViolation(f"exponential update broke the round encoding at {x} -> {result}")
    return result


def exponential_spec() -> BasicWamSpec:
    return BasicWamSpec(
        "exponential",
        f=lambda x: exponential_update(x, won=False),
        g=lambda x: exponential_update(x, won=True),
        enforce_monotone=False,
    )


def exponential_dry_spell_bound(n: int) -> int:
    """n + h(n), where h(n) is the least h with 2**(k!) > n for all k >= h."""
    h = 1
    while 2 ** math.factorial(h) <= n:
        h += 1
    return n + h


# --------------------------------------------------------------------------
# consensus rule


@dataclass(frozen=True)
class ConsensusState:
    signed_weights: tuple[Fraction, ...]
    round_index: int


def consensus_initial_state(n: int) -> ConsensusState:
    return ConsensusState((ONE,) * n, 0)


def step_consensus(state: ConsensusState, rnd: DecisionInstance,
                   tb: TieBreaker = LEXICOGRAPHIC) -> tuple[str, ConsensusState]:
    """Winner maximizes the clamped weight of approvers; their joint debit is n.

    Every voter gains 1; the winner's supporters with non-negative weight
    additionally share a total reduction of n equally. Negative-weight voters
    never count as supporters, so the total weight stays exactly n.
    """
    weights = state.signed_weights
    n = len(weights)
    if rnd.voter_count != n:
        raise ValueError("state arity does not match the round")
    if sum(weights) != n:
        raise InvariantViolation(f"consensus weights sum to {sum(weights)}, expected {n}")
    winner = _argmax_candidate(rnd, lambda c: score(rnd, weights, c, clamp_negative=True), tb)
    supporters = [v for v in rnd.approvers(winner) if weights[v] >= 0]
    if not supporters:
        raise InvariantViolation("consensus winner has no supporter with non-negative weight")
    debit = Fraction(n, len(supporters))
    new_weights = tuple(
        w + 1 - (debit if v in supporters else 0) for v, w in enumerate(weights)
    )
    if sum(new_weights) != n:
        raise InvariantViolation("consensus update failed to conserve total weight")
    return winner, ConsensusState(new_weights, state.round_index + 1)


# --------------------------------------------------------------------------
# sequential load balancing


@dataclass(frozen=True)
class PhragmenState:
    loads: tuple[Fraction, ...]
    round_index: int


def phragmen_initial_state(n: int) -> PhragmenState:
    return PhragmenState((Fraction(0),) * n, 0)


def _best_prefix(loads, approvers: list[int]) -> tuple[Fraction, list[int]]:
    """Minimal achievable shared load for a candidate, using the smallest optimal prefix.

    Approvers are scanned in increasing load order; the optimum is always such
    a prefix, and extensions that leave the load unchanged are excluded so the
    selected voter set is canonical.
    """
    running = Fraction(0)
    best_load = None
    best_cut = 0
    for i, voter in enumerate(approvers, start=1):
        running += loads[voter]
        value = (1 + running) / i
        if best_load is None or value < best_load:
            best_load, best_cut = value, i
    return best_load, approvers[:best_cut]


def step_phragmen(state: PhragmenState, rnd: DecisionInstance,
                  tb: TieBreaker = LEXICOGRAPHIC) -> tuple[str, PhragmenState]:
    """Give the round's unit load to the approver group that ends up lightest."""
    loads = state.loads
    if rnd.voter_count != len(loads):
        raise ValueError("state arity does not match the round")
    if sum(loads) != state.round_index:
        raise InvariantViolation("total load must equal the number of decided rounds")
    options = {}
    for cand in rnd.candidates:
        approvers = sorted(rnd.approvers(cand), key=lambda v: (loads[v], tb.voter_key(v)))
        if not approvers:
            raise UnapprovedCandidateError(f"candidate {cand!r} has no approvers")
        options[cand] = _best_prefix(loads, approvers)
    winner = _argmax_candidate(rnd, lambda c: -options[c][0], tb)
    new_load, chosen = options[winner]
    new_loads = list(loads)
    for voter in chosen:
        new_loads[voter] = new_load
    return winner, PhragmenState(tuple(new_loads), state.round_index + 1)


# --------------------------------------------------------------------------
# rotating dictator


def step_rotating_dictator(round_index: int, rnd: DecisionInstance,
                           tb: TieBreaker = LEXICOGRAPHIC) -> str:
    """Round r is decided by voter r mod n alone."""
    dictator = round_index % rnd.voter_count
    return tb.best_candidate(rnd.approvals[dictator])


# --------------------------------------------------------------------------
# pi-marked PAV


_PI_DIGITS = (
    "3."
    "14159265358979323846264338327950288419716939937510"
    "58209749445923078164062862089986280348253421170679"
    "8214808651328230664709384460955058223172"
)


def _pi_enclosure() -> tuple[Fraction, Fraction]:
    digits = _PI_DIGITS.replace(".", "")
    scale = 10 ** (len(digits) - 1)
    lower = Fraction(int(digits), scale)
    return lower, lower + Fraction(1, scale)


#: Certified rational enclosure of pi, width 10**-141 (< 2**-256).
PI_LOWER, PI_UPPER = _pi_enclosure()


@dataclass(frozen=True)
class PiValue:
    """An exact number of the form rational_part + pi_part * pi."""

    rational_part: Fraction
    pi_part: Fraction

    def __add__(self, other: "PiValue") -> "PiValue":
        return PiValue(self.rational_part + other.rational_part, self.pi_part + other.pi_part)


PI_ZERO = PiValue(Fraction(0), Fraction(0))


def compare_pi_values(x: PiValue, y: PiValue,
                      enclosure: tuple[Fraction, Fraction] = (PI_LOWER, PI_UPPER)) -> int:
    """Exact three-way comparison of a + b*pi values (-1, 0, 1).

    Structural ties are equalities; otherwise the sign of the difference is
    decided against the certified enclosure of pi, and an enclosure too wide
    to decide raises rather than guessing.
    """
    da = x.rational_part - y.rational_part
    db = x.pi_part - y.pi_part
    if db == 0:
        return (da > 0) - (da < 0)
    if da == 0:
        return (db > 0) - (db < 0)
    # sign of da + db*pi: compare pi against -da/db
    threshold = -da / db
    lower, upper = enclosure
    if threshold < lower:
        verdict_at_pi_positive = 1  # pi > threshold, so da + db*pi has db's sign
        return verdict_at_pi_positive if db > 0 else -1 * verdict_at_pi_positive
    if threshold > upper:
        return -1 if db > 0 else 1
    raise IndeterminatePiComparison(
        f"cannot separate pi from {threshold} at the configured precision"
    )


@dataclass(frozen=True)
class PiPavState:
    weights: tuple[PiValue, ...]
    round_index: int


def pi_pav_initial_state(n: int) -> PiPavState:
    return PiPavState(tuple(PiValue(ONE, Fraction(0)) for _ in range(n)), 0)


def _pi_mark(value: PiValue) -> PiValue:
    if value.pi_part != 0:
        raise InvariantViolation("a voter weight would be multiplied by pi twice before a win")
    return PiValue(Fraction(0), value.rational_part)


def step_pi_pav(state: PiPavState, rnd: DecisionInstance,
                tb: TieBreaker = LEXICOGRAPHIC) -> tuple[str, PiPavState]:
    """PAV, except a voter's weight is multiplied by pi on her first loss.

    Winning resets the weight to 1/(sat+1), keeping the pi marker if present.
    Scores are exact a + b*pi sums compared via the certified enclosure.
    """
    weights = state.weights
    if rnd.voter_count != len(weights):
        raise ValueError("state arity does not match the round")

    def pi_score(cand: str) -> PiValue:
        total = PI_ZERO
        for voter in rnd.approvers(cand):
            total = total + weights[voter]
        return total

    scores = {cand: pi_score(cand) for cand in rnd.candidates}
    winner = None
    for cand in rnd.candidates:
        if winner is None:
            winner = cand
            continue
        cmp = compare_pi_values(scores[cand], scores[winner])
        if cmp > 0 or (cmp == 0 and tb.candidate_key(cand) < tb.candidate_key(winner)):
            winner = cand
    new_weights = []
    for voter, approval in enumerate(rnd.approvals):
        w = weights[voter]
        if winner in approval:
            if w.pi_part == 0:
                new_weights.append(PiValue(w.rational_part / (w.rational_part + 1), Fraction(0)))
            else:
                new_weights.append(PiValue(Fraction(0), w.pi_part / (w.pi_part + 1)))
        else:
            new_weights.append(_pi_mark(w) if w.pi_part == 0 else w)
    return winner, PiPavState(tuple(new_weights), state.round_index + 1)


# --------------------------------------------------------------------------
# uniform rule interface


class BasicWamRule:
    def __init__(self, spec: BasicWamSpec):
        self.rule_id = spec.rule_id
        self.spec = spec

    def initial_state(self, n: int) -> WamState:
        return self.spec.initial_state(n)

    def step(self, state, rnd, tb):
        return step_basic_wam(self.spec, state, rnd, tb)

    def snapshot(self, state) -> dict:
        return {"weights": state.weights}


class ConsensusRule:
    rule_id = "consensus"

    def initial_state(self, n: int) -> ConsensusState:
        return consensus_initial_state(n)

    def step(self, state, rnd, tb):
        return step_consensus(state, rnd, tb)

    def snapshot(self, state) -> dict:
        return {"weights": state.signed_weights}


class PhragmenRule:
    rule_id = "phragmen"

    def initial_state(self, n: int) -> PhragmenState:
        return phragmen_initial_state(n)

    def step(self, state, rnd, tb):
        return step_phragmen(state, rnd, tb)

    def snapshot(self, state) -> dict:
        return {"loads": state.loads}


class RotatingDictatorRule:
    rule_id = "dictator"

    def initial_state(self, n: int) -> int:
        return 0

    def step(self, state, rnd, tb):
        return step_rotating_dictator(state, rnd, tb), state + 1

    def snapshot(self, state) -> dict:
        return {"round": state}


class PiPavRule:
    rule_id = "pi-pav"

    def initial_state(self, n: int) -> PiPavState:
        return pi_pav_initial_state(n)

    def step(self, state, rnd, tb):
        return step_pi_pav(state, rnd, tb)

    def snapshot(self, state) -> dict:
        return {"weights": tuple((w.rational_part, w.pi_part) for w in state.weights)}


_RULE_FACTORIES = {
    "av": lambda: BasicWamRule(av_spec()),
    "pav": lambda: BasicWamRule(pav_spec()),
    "reset": lambda: BasicWamRule(reset_spec()),
    "exponential": lambda: BasicWamRule(exponential_spec()),
    "consensus": ConsensusRule,
    "phragmen": PhragmenRule,
    "dictator": RotatingDictatorRule,
    "rotating-dictator": RotatingDictatorRule,
    "pi-pav": PiPavRule,
}

#: Canonical rule identifiers, in the order the results table lists them.
RULE_IDS = ["av", "pav", "reset", "exponential", "consensus", "dictator", "phragmen"]


class UnknownRuleError(ValueError):
    def __init__(self, rule_id):
        super().__init__(f"unknown rule {rule_id!r}; known: {sorted(set(_RULE_FACTORIES))}")


def get_rule(rule_id: str):
    try:
        factory = _RULE_FACTORIES[rule_id]
    except KeyError:
        raise UnknownRuleError(rule_id) from None
    return factory()


@dataclass(frozen=True)
class RuleRun:
    """The outcome of running one rule over a sequence, with a full state trace.

    ``states[t]`` is the snapshot entering round t (0-based); the final entry
    is the state after the last round.
    """

    rule_id: str
    choices: ChoiceSequence
    states: tuple[dict, ...]

    @property
    def winners(self) -> tuple[str, ...]:
        return self.choices.winners


def run_rule(rule, seq: DecisionSequence, tb: Optional[TieBreaker] = None) -> RuleRun:
    """Run a rule (by id or instance) over a whole sequence."""
    if isinstance(rule, str):
        rule = get_rule(rule)
    if tb is None:
        tb = LEXICOGRAPHIC
    state = rule.initial_state(seq.voter_count)
    winners = []
    snapshots = [rule.snapshot(state)]
    for rnd in seq.rounds:
        winner, state = rule.step(state, rnd, tb)
        winners.append(winner)
        snapshots.append(rule.snapshot(state))
    return RuleRun(rule.rule_id, ChoiceSequence(tuple(winners)), tuple(snapshots))
