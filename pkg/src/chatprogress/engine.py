"""Deterministic core of the progress feedback agent.

Evaluates each question-answer exchange against a task's rule sets, emits
the set of newly completed steps, and drives the completion-modal state
machine. The engine is stateless between calls: progress and the evolving
RSA value binding are passed in and returned.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, replace
from math import gcd
from typing import Any, Mapping, Sequence

from . import rsa
from .domain import Message, ProgressState, TaskDefinition
from .rules import (
    KEYWORD_PRESENT,
    NUMERIC_RELATION,
    ORACLE_VERIFY,
    Check,
    RuleSet,
)

log = logging.getLogger(__name__)

MODAL_NONE = "none"
MODAL_PROMPTING = "prompting"
MODAL_DISMISSED_CONTINUE = "dismissed-continue"
MODAL_EXITED = "exited"
MODAL_PHASES = (MODAL_NONE, MODAL_PROMPTING, MODAL_DISMISSED_CONTINUE, MODAL_EXITED)

CHOICE_CONTINUE = "continue"
CHOICE_EXIT = "exit"

# Values above this are outside the arithmetic scope and are never
# considered as key-material candidates.
_VALUE_LIMIT = 2**63


class EngineError(Exception):
    pass


class OracleUnavailable(EngineError):
    """An oracle-verify check referenced an operation the engine lacks."""


class MalformedVerdict(EngineError):
    """A judge reply could not be parsed into a structured verdict."""


class ChoiceWithoutPrompt(EngineError):
    """A modal choice arrived while no completion prompt was showing."""


@dataclass(frozen=True)
class EvaluationVerdict:
    relevant: bool
    newly_completed: frozenset[int]
    goal_complete: bool


@dataclass(frozen=True)
class ModalState:
    phase: str = MODAL_NONE


@dataclass(frozen=True)
class NumberToken:
    value: int
    start: int
    end: int


# Digit runs not embedded in a word; "x12" yields nothing, "n=12" yields 12.
_NUMBER_RE = re.compile(r"(?<![0-9A-Za-z_])[0-9]+(?![0-9A-Za-z_])")


def extract_numbers(text: str) -> list[NumberToken]:
    """All base-10 integer literals with their spans, in text order."""
    return [
        NumberToken(int(m.group()), m.start(), m.end())
        for m in _NUMBER_RE.finditer(text)
    ]


@dataclass(frozen=True)
class RsaBinding:
    """Key values bound from the conversation so far.

    A binding is replaced by contradictory later values only while no
    dependent check has passed with it; once verified it sticks, so a user
    restarting with fresh primes is honored only before they build on the
    old ones.
    """

    p: int | None = None
    q: int | None = None
    e: int | None = None
    d: int | None = None
    pq_verified: bool = False
    e_verified: bool = False

    @property
    def n(self) -> int | None:
        return self.p * self.q if self.p and self.q else None

    @property
    def phi(self) -> int | None:
        return (self.p - 1) * (self.q - 1) if self.p and self.q else None


@dataclass(frozen=True)
class EvaluationOutcome:
    verdict: EvaluationVerdict
    binding: RsaBinding


# -- oracle-verify operations ------------------------------------------------

def _small_primes(values: Sequence[int]) -> list[int]:
    return [v for v in values if 2 <= v < _VALUE_LIMIT and rsa.is_prime(v)]


def _prime_pairs_with(values: Sequence[int], derive) -> list[tuple[int, int]]:
    """Ordered distinct prime pairs (a, b) whose derive(a, b) is present."""
    present = set(values)
    primes_seen = []
    pairs = []
    for v in values:
        if 2 <= v < _VALUE_LIMIT and rsa.is_prime(v):
            for earlier in primes_seen:
                if earlier != v and derive(earlier, v) in present:
                    pairs.append((earlier, v))
            primes_seen.append(v)
    return pairs


def _rebind_pair(binding: RsaBinding, pair: tuple[int, int]) -> RsaBinding:
    # A new prime pair invalidates any exponents derived from the old one.
    return RsaBinding(p=pair[0], q=pair[1])


def _op_product_of_primes(binding, values, params):
    pairs = _prime_pairs_with(values, lambda a, b: a * b)
    if not pairs:
        return False, binding
    if binding.p is not None:
        if (binding.p, binding.q) in pairs or (binding.q, binding.p) in pairs:
            return True, binding
        if not binding.pq_verified:
            return True, _rebind_pair(binding, pairs[0])
        return True, binding
    return True, _rebind_pair(binding, pairs[0])


def _op_totient(binding, values, params):
    present = set(values)
    if binding.p is not None:
        if binding.phi in present:
            return True, replace(binding, pq_verified=True)
        if not binding.pq_verified:
            pairs = _prime_pairs_with(values, lambda a, b: (a - 1) * (b - 1))
            if pairs:
                return True, _rebind_pair(binding, pairs[0])
        return False, binding
    pairs = _prime_pairs_with(values, lambda a, b: (a - 1) * (b - 1))
    if pairs:
        return True, _rebind_pair(binding, pairs[0])
    return False, binding


def _op_public_exponent(binding, values, params):
    phi = binding.phi
    if phi is None:
        return False, binding
    excluded = {binding.p, binding.q, binding.n, phi}
    candidates = [
        v
        for v in values
        if 1 < v < phi and v not in excluded and gcd(v, phi) == 1
    ]
    if not candidates:
        return False, binding
    verified = replace(binding, pq_verified=True)
    if binding.e is None:
        return True, replace(verified, e=candidates[0])
    if binding.e in candidates or binding.e_verified:
        return True, verified
    # Contradictory unverified exponent: honor the restart.
    return True, replace(verified, e=candidates[0], d=None)


def _op_private_exponent(binding, values, params):
    phi = binding.phi
    if phi is None or binding.e is None:
        return False, binding
    candidates = [v for v in values if 1 < v < phi and binding.e * v % phi == 1]
    if not candidates:
        return False, binding
    return True, replace(
        binding, d=candidates[0], pq_verified=True, e_verified=True
    )


def _op_ciphertext(binding, values, params):
    n = binding.n
    if n is None or binding.e is None:
        return False, binding
    plaintext = params.get("plaintext", "")
    codes = rsa.char_codes(plaintext)
    if not plaintext or any(code >= n for code in codes):
        return False, binding
    expected = [rsa.mod_pow(code, binding.e, n) for code in codes]
    # The full block sequence must appear in order; interleaved values such
    # as list indices are fine.
    it = iter(values)
    if all(block in it for block in expected):
        return True, replace(binding, pq_verified=True, e_verified=True)
    return False, binding


_ORACLE_OPS = {
    "product-of-primes": _op_product_of_primes,
    "totient": _op_totient,
    "public-exponent": _op_public_exponent,
    "private-exponent": _op_private_exponent,
    "ciphertext": _op_ciphertext,
}

_RELATIONS = {
    "product": lambda ops: len(ops) == 3 and ops[0] * ops[1] == ops[2],
    "equal": lambda ops: len(ops) == 2 and ops[0] == ops[1],
    "coprime": lambda ops: len(ops) == 2 and gcd(ops[0], ops[1]) == 1,
}


def _eval_check(
    check: Check, text: str, values: Sequence[int], binding: RsaBinding
) -> tuple[bool, RsaBinding]:
    if check.kind == KEYWORD_PRESENT:
        lowered = text.lower()
        hits = sum(1 for k in check.params["keywords"] if k.lower() in lowered)
        return hits >= check.params.get("minMatches", 1), binding
    if check.kind == NUMERIC_RELATION:
        relation = _RELATIONS[check.params["relation"]]
        for match in re.finditer(check.params["pattern"], text):
            try:
                operands = [int(g) for g in match.groups()]
            except (TypeError, ValueError):
                continue
            if relation(operands):
                return True, binding
        return False, binding
    if check.kind == ORACLE_VERIFY:
        operation = _ORACLE_OPS.get(check.params["operation"])
        if operation is None:
            raise OracleUnavailable(
                f"oracle operation {check.params['operation']!r} is not available"
            )
        return operation(binding, values, check.params)
    raise EngineError(f"unhandled check kind {check.kind!r}")


def _rule_set_matches(
    rule_set: RuleSet, text: str, values: Sequence[int], binding: RsaBinding
) -> tuple[bool, RsaBinding]:
    if not rule_set.matches_relevance(text):
        return False, binding
    matched = True
    for check in rule_set.checks:
        passed, binding = _eval_check(check, text, values, binding)
        matched = matched and passed
    return matched, binding


def run_evaluation(
    question: Message,
    answer: Message,
    task: TaskDefinition,
    progress: ProgressState,
    binding: RsaBinding | None = None,
) -> EvaluationOutcome:
    """Evaluate one exchange against every subtask rule set.

    Checks run in step order so values bound by an early subtask are
    available to later ones within the same exchange; a single exchange may
    therefore complete several steps at once. Already-completed subtasks
    are still evaluated for their binding side effects, but never re-enter
    ``newly_completed``.
    """
    binding = binding or RsaBinding()
    text = f"{question.text}\n{answer.text}"
    if not task.fundamental_rule.matches_relevance(text):
        verdict = EvaluationVerdict(
            relevant=False,
            newly_completed=frozenset(),
            goal_complete=progress.completed_steps == task.steps,
        )
        return EvaluationOutcome(verdict, binding)

    values = [token.value for token in extract_numbers(text)]
    matched_binding = binding
    _, matched_binding = _rule_set_matches(
        task.fundamental_rule, text, values, matched_binding
    )
    newly: set[int] = set()
    for sub in sorted(task.subtasks, key=lambda s: s.step):
        matched, matched_binding = _rule_set_matches(
            sub.rules, text, values, matched_binding
        )
        if matched and sub.step not in progress.completed_steps:
            newly.add(sub.step)
    covered = progress.completed_steps | newly
    verdict = EvaluationVerdict(
        relevant=True,
        newly_completed=frozenset(newly),
        goal_complete=covered == task.steps,
    )
    return EvaluationOutcome(verdict, matched_binding)


def evaluate_exchange(
    question: Message,
    answer: Message,
    task: TaskDefinition,
    progress: ProgressState,
    rsa_state: RsaBinding | None = None,
) -> EvaluationVerdict:
    """Verdict for one exchange; see run_evaluation for the binding-carrying form."""
    return run_evaluation(question, answer, task, progress, rsa_state).verdict


# -- judge backends ----------------------------------------------------------

def parse_raw_verdict(raw: Any) -> tuple[bool, list[int]]:
    """Validate the judge reply shape {relevant: bool, completedSteps: [int]}."""
    if not isinstance(raw, Mapping):
        raise MalformedVerdict(f"verdict must be an object, got {type(raw).__name__}")
    relevant = raw.get("relevant")
    steps = raw.get("completedSteps")
    if not isinstance(relevant, bool) or not isinstance(steps, list):
        raise MalformedVerdict(f"verdict fields have wrong types: {raw!r}")
    if not all(isinstance(s, int) and not isinstance(s, bool) for s in steps):
        raise MalformedVerdict(f"completedSteps must be integers: {steps!r}")
    return relevant, steps


def run_feedback_agent(
    backend: Any,
    question: Message,
    answer: Message,
    task: TaskDefinition,
    progress: ProgressState,
    binding: RsaBinding | None = None,
) -> EvaluationOutcome:
    """Judge one exchange via the configured backend and sanitize the verdict.

    Deterministic backends delegate to run_evaluation. Remote backends
    return a raw structured verdict; steps outside the task or already
    completed are dropped, and an unparseable reply degrades to "no
    change" rather than a false completion.
    """
    binding = binding or RsaBinding()
    if getattr(backend, "kind", None) in (None, "deterministic-rules"):
        return run_evaluation(question, answer, task, progress, binding)
    try:
        raw = backend.raw_verdict(question, answer, task, progress)
        relevant, steps = parse_raw_verdict(raw)
    except MalformedVerdict as exc:
        log.warning("feedback judge reply malformed, treating as no change: %s", exc)
        verdict = EvaluationVerdict(
            relevant=False,
            newly_completed=frozenset(),
            goal_complete=progress.completed_steps == task.steps,
        )
        return EvaluationOutcome(verdict, binding)
    sanitized = frozenset(
        s for s in steps if s in task.steps and s not in progress.completed_steps
    )
    covered = progress.completed_steps | sanitized
    verdict = EvaluationVerdict(
        relevant=relevant,
        newly_completed=sanitized,
        goal_complete=covered == task.steps,
    )
    return EvaluationOutcome(verdict, binding)


# -- completion modal --------------------------------------------------------

def advance_modal(
    modal: ModalState,
    verdict: EvaluationVerdict | None = None,
    user_choice: str | None = None,
) -> ModalState:
    """Advance the completion-modal state machine.

    The prompt opens whenever a goal-complete verdict arrives while no
    prompt is showing (including after a dismissal, so re-completion
    re-prompts). A user choice is only legal while prompting.
    """
    if user_choice is not None:
        if modal.phase != MODAL_PROMPTING:
            raise ChoiceWithoutPrompt(
                f"choice {user_choice!r} with modal in phase {modal.phase!r}"
            )
        if user_choice == CHOICE_CONTINUE:
            return ModalState(MODAL_DISMISSED_CONTINUE)
        if user_choice == CHOICE_EXIT:
            return ModalState(MODAL_EXITED)
        raise EngineError(f"unknown modal choice {user_choice!r}")
    if modal.phase in (MODAL_NONE, MODAL_DISMISSED_CONTINUE):
        if verdict is not None and verdict.goal_complete:
            return ModalState(MODAL_PROMPTING)
    return modal
