"""Declarative evaluation rules applied to question-answer exchanges.

A :class:`RuleSet` is pure data: a list of lowercase relevance keywords
(any-match) plus zero or more :class:`Check` objects. The progress engine
interprets checks; this module only defines, validates, and (de)serializes
them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

KEYWORD_PRESENT = "keyword-present"
NUMERIC_RELATION = "numeric-relation"
ORACLE_VERIFY = "oracle-verify"

CHECK_KINDS = (KEYWORD_PRESENT, NUMERIC_RELATION, ORACLE_VERIFY)

# Relations usable by numeric-relation checks. Operands are captured by the
# check's regex pattern, in group order.
NUMERIC_RELATIONS = ("product", "equal", "coprime")

# Verification operations the progress engine implements on top of the
# exact-arithmetic module. Listed here so rule packs can be validated
# without importing the engine.
ORACLE_OPERATIONS = (
    "product-of-primes",
    "totient",
    "public-exponent",
    "private-exponent",
    "ciphertext",
)


class RuleFormatError(ValueError):
    """A rule or check dictionary does not match the documented schema."""


@dataclass(frozen=True)
class Check:
    """One evaluation condition of a given kind with kind-specific params."""

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in CHECK_KINDS:
            raise RuleFormatError(f"unknown check kind {self.kind!r}")
        object.__setattr__(self, "params", dict(self.params))
        if self.kind == KEYWORD_PRESENT:
            keywords = self.params.get("keywords")
            if not keywords or not all(isinstance(k, str) and k for k in keywords):
                raise RuleFormatError("keyword-present check needs a nonempty keyword list")
            min_matches = self.params.setdefault("minMatches", 1)
            if not isinstance(min_matches, int) or min_matches < 1:
                raise RuleFormatError("minMatches must be a positive integer")
        elif self.kind == NUMERIC_RELATION:
            relation = self.params.get("relation")
            if relation not in NUMERIC_RELATIONS:
                raise RuleFormatError(f"unknown numeric relation {relation!r}")
            if not isinstance(self.params.get("pattern"), str):
                raise RuleFormatError("numeric-relation check needs an operand pattern")
        elif self.kind == ORACLE_VERIFY:
            operation = self.params.get("operation")
            if operation not in ORACLE_OPERATIONS:
                raise RuleFormatError(f"unknown oracle operation {operation!r}")


@dataclass(frozen=True)
class RuleSet:
    """Relevance keywords (any-match) plus checks that must all pass."""

    relevance_keywords: tuple[str, ...] = ()
    checks: tuple[Check, ...] = ()

    def __post_init__(self) -> None:
        lowered = tuple(k.lower() for k in self.relevance_keywords)
        object.__setattr__(self, "relevance_keywords", lowered)

    def matches_relevance(self, text: str) -> bool:
        """True when any keyword occurs in text (or no keywords are set)."""
        if not self.relevance_keywords:
            return True
        lowered = text.lower()
        return any(keyword in lowered for keyword in self.relevance_keywords)


def check_from_dict(raw: Mapping[str, Any]) -> Check:
    if not isinstance(raw, Mapping) or "kind" not in raw:
        raise RuleFormatError("check must be an object with a 'kind' field")
    params = {k: v for k, v in raw.items() if k != "kind"}
    return Check(kind=raw["kind"], params=params)


def check_to_dict(check: Check) -> dict[str, Any]:
    return {"kind": check.kind, **check.params}


def rule_set_from_dict(raw: Mapping[str, Any]) -> RuleSet:
    if not isinstance(raw, Mapping):
        raise RuleFormatError("rule set must be an object")
    keywords = raw.get("relevanceKeywords", ())
    if not all(isinstance(k, str) for k in keywords):
        raise RuleFormatError("relevanceKeywords must be strings")
    checks = tuple(check_from_dict(c) for c in raw.get("checks", ()))
    return RuleSet(relevance_keywords=tuple(keywords), checks=checks)


def rule_set_to_dict(rule_set: RuleSet) -> dict[str, Any]:
    return {
        "relevanceKeywords": list(rule_set.relevance_keywords),
        "checks": [check_to_dict(c) for c in rule_set.checks],
    }
