"""The on-disk sequence format and canonical (byte-stable) writer.

A sequence file is one JSON document: ``voters`` (int), ``rounds`` (array of
``{"candidates": [...], "approvals": [[...], ...]}``) and an optional
``tiebreak`` array listing candidates from highest to lowest priority. The
canonical writer sorts keys and fixes indentation, so rendered fixtures are
diffable and round-trip byte-identically.
"""

from __future__ import annotations

import json
from typing import Optional

from .core import DecisionInstance, DecisionSequence, TieBreaker


class SequenceFormatError(ValueError):
    """The document does not describe a valid decision sequence."""


def sequence_to_document(seq: DecisionSequence, tiebreak: Optional[TieBreaker] = None) -> dict:
    document = {
        "voters": seq.voter_count,
        "rounds": [
            {
                "candidates": list(rnd.candidates),
                "approvals": [sorted(approval) for approval in rnd.approvals],
            }
            for rnd in seq.rounds
        ],
    }
    if tiebreak is not None and tiebreak.candidate_order is not None:
        document["tiebreak"] = list(tiebreak.candidate_order)
    return document


def write_sequence(seq: DecisionSequence, tiebreak: Optional[TieBreaker] = None) -> str:
    return canonical_json(sequence_to_document(seq, tiebreak))


def canonical_json(document) -> str:
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


def document_to_sequence(document) -> tuple[DecisionSequence, Optional[TieBreaker]]:
    try:
        voters = document["voters"]
        rounds = []
        for rnd in document["rounds"]:
            candidates = tuple(rnd["candidates"])
            approvals = tuple(frozenset(a) for a in rnd["approvals"])
            rounds.append(DecisionInstance(candidates, approvals))
        seq = DecisionSequence(voters, tuple(rounds))
    except (KeyError, TypeError, ValueError) as error:
        raise SequenceFormatError(f"invalid sequence document: {error}") from error
    tiebreak = None
    if "tiebreak" in document:
        try:
            tiebreak = TieBreaker(candidate_order=tuple(document["tiebreak"]))
        except (TypeError, ValueError) as error:
            raise SequenceFormatError(f"invalid tiebreak order: {error}") from error
    return seq, tiebreak


def parse_sequence(text: str) -> tuple[DecisionSequence, Optional[TieBreaker]]:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as error:
        raise SequenceFormatError(f"not valid JSON: {error}") from error
    return document_to_sequence(document)


def read_sequence_file(path) -> tuple[DecisionSequence, Optional[TieBreaker]]:
    with open(path, encoding="utf-8") as handle:
        return parse_sequence(handle.read())


def write_sequence_file(path, seq: DecisionSequence, tiebreak: Optional[TieBreaker] = None) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(write_sequence(seq, tiebreak))
