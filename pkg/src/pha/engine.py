"""Best-first search for minimal consistent explanations.

The queue holds partial explanations ``<g <- C, D>``: a goal tag, the
remaining conjunction ``C`` and the hypotheses ``D`` assumed so far.  Two
seeds are searched together, one for the query and one for ``false``; every
completed ``false`` entry is a nogood that prunes the rest of the search.

Entries are popped by decreasing prior.  Priors within a relative ``1e-12``
of each other count as tied; ties go to ``false`` entries first, then to the
oldest entry.

While the search runs, ``P_D`` (mass of explanations found) and ``P_Q``
(mass of query entries still queued) bracket the probability of the query
for programs whose rules are exclusive and covering, as compiled networks
are.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence

from .errors import NonGroundQuery
from .kb import KnowledgeBase
from .terms import FALSE, Atom, apply, is_ground, new_counter

TIE_TOLERANCE = 1e-12


class Goal(enum.IntEnum):
    # Lower value wins ties.
    FALSE = 0
    USER = 1


@dataclass(eq=False)
class PartialExplanation:
    goal: Goal
    remaining: tuple
    hypotheses: FrozenSet[Atom]
    prior: float
    log_prior: float
    seq: int
    dead: bool = False

    def __str__(self) -> str:
        g = "false" if self.goal is Goal.FALSE else "goal"
        c = " & ".join(str(a) for a in self.remaining) or "true"
        return f"<{g} <- {c}, {format_hypotheses(self.hypotheses)}> p={self.prior:.6g}"


@dataclass(frozen=True)
class Explanation:
    hypotheses: FrozenSet[Atom]
    prior: float

    def sorted_hypotheses(self) -> List[str]:
        return sorted(str(h) for h in self.hypotheses)

    def __str__(self) -> str:
        return f"{format_hypotheses(self.hypotheses)} p={self.prior:.6g}"


@dataclass(frozen=True)
class Nogood:
    hypotheses: FrozenSet[Atom]


def format_hypotheses(hyps: Iterable[Atom]) -> str:
    return "{" + ", ".join(sorted(str(h) for h in hyps)) + "}"


class StepKind(enum.Enum):
    EXPANDED = "expanded"
    EXPLANATION = "explanation"
    NOGOOD = "nogood"
    DISCARDED = "discarded"
    EXHAUSTED = "exhausted"


@dataclass
class StepOutcome:
    kind: StepKind
    entry: Optional[PartialExplanation] = None
    children: List[PartialExplanation] = field(default_factory=list)
    explanation: Optional[Explanation] = None
    nogood: Optional[Nogood] = None
    reason: str = ""


@dataclass(frozen=True)
class StopCriteria:
    """When :meth:`Search.run` should stop before the search is finished.

    ``epsilon`` stops once ``P_Q <= epsilon * max(P_D, floor)``.
    """

    max_expansions: Optional[int] = None
    max_explanations: Optional[int] = None
    epsilon: Optional[float] = None
    floor: float = 0.0


EXHAUST = StopCriteria()


class Termination(str, enum.Enum):
    EXHAUSTED = "exhausted"
    MAX_EXPANSIONS = "max_expansions"
    MAX_EXPLANATIONS = "max_explanations"
    EPSILON = "epsilon"


@dataclass
class SearchResult:
    query: tuple
    explanations: List[Explanation]
    nogoods: List[Nogood]
    lower: float
    upper: float
    termination: Termination
    expansions: int
    duplicates: int = 0
    nonminimal: int = 0
    retracted: int = 0

    @property
    def exact(self) -> bool:
        return self.termination is Termination.EXHAUSTED

    @property
    def disjointness_warning(self) -> bool:
        """True if one explanation was reached by two different proofs.

        That cannot happen when the rules for every atom are exclusive, so
        the mass sum may overcount.
        """
        return self.duplicates > 0


class Search:
    """One best-first search over a shared, immutable knowledge base.

    Not thread-safe; run separate searches for concurrent queries.
    """

    def __init__(self, kb: KnowledgeBase, query: Sequence[Atom], *,
                 keep_zero: bool = False, log_space: bool = False,
                 nogoods: Iterable[Iterable[Atom]] = ()):
        query = tuple(query)
        for a in query:
            if a == FALSE:
                raise NonGroundQuery("'false' cannot be queried")
            if not is_ground(a):
                raise NonGroundQuery(f"query atom {a} is not ground")
        self.kb = kb
        self.query = query
        self.keep_zero = keep_zero
        self.log_space = log_space
        self.counter = new_counter()
        self._seq = 0
        self._heap: list = []
        self.found: List[Explanation] = []
        self.nogoods: List[Nogood] = []
        self._nogood_index: Dict[Atom, List[FrozenSet[Atom]]] = {}
        self._empty_nogood = False
        self._queue_mass = 0.0
        self._user_entries = 0
        self._false_entries = 0
        self.p_d = 0.0
        self.expansions = 0
        self.duplicates = 0
        self.nonminimal = 0
        self.retracted = 0
        self.pruned_zero = 0
        self._push(Goal.USER, query, frozenset(), 1.0, 0.0)
        self._push(Goal.FALSE, (FALSE,), frozenset(), 1.0, 0.0)
        for n in nogoods:
            self.add_nogood(n)

    # -- queue bookkeeping -------------------------------------------------

    def _push(self, goal, remaining, hyps, prior, log_prior) -> PartialExplanation:
        entry = PartialExplanation(goal, remaining, hyps, prior, log_prior, self._seq)
        self._seq += 1
        key = log_prior if self.log_space else prior
        heapq.heappush(self._heap, (-key, int(goal), entry.seq, entry))
        if goal is Goal.USER:
            self._queue_mass += prior
            self._user_entries += 1
        else:
            self._false_entries += 1
        return entry

    def _forget(self, entry: PartialExplanation) -> None:
        if entry.goal is Goal.USER:
            self._user_entries -= 1
            if self._user_entries == 0:
                self._queue_mass = 0.0
            else:
                self._queue_mass = max(0.0, self._queue_mass - entry.prior)
        else:
            self._false_entries -= 1

    def _pop_live(self) -> Optional[tuple]:
        while self._heap:
            item = heapq.heappop(self._heap)
            if not item[3].dead:
                return item
        return None

    def _pop(self) -> Optional[PartialExplanation]:
        top = self._pop_live()
        if top is None:
            return None
        # Collect entries tied with the top within tolerance; heap order
        # already prefers false goals and older entries among exact ties.
        best = top
        window = []
        limit = self._tie_limit(-top[0])
        while self._heap:
            nxt = self._heap[0]
            if nxt[3].dead:
                heapq.heappop(self._heap)
                continue
            if -nxt[0] < limit:
                break
            window.append(heapq.heappop(self._heap))
        for item in window:
            if (item[1], item[2]) < (best[1], best[2]):
                best = item
        for item in window + [top]:
            if item is not best:
                heapq.heappush(self._heap, item)
        entry = best[3]
        self._forget(entry)
        return entry

    def _tie_limit(self, key: float) -> float:
        if self.log_space:
            return key - TIE_TOLERANCE
        return key - TIE_TOLERANCE * key

    @property
    def queue_size(self) -> int:
        return self._user_entries + self._false_entries

    @property
    def user_entries(self) -> int:
        return self._user_entries

    @property
    def p_q(self) -> float:
        return self._queue_mass

    def queue(self) -> List[PartialExplanation]:
        """Live entries in pop order (ignoring the tie window)."""
        return [item[3] for item in sorted(self._heap) if not item[3].dead]

    def bounds(self) -> tuple:
        """``(P_D, min(1, P_D + P_Q))``."""
        return self.p_d, min(1.0, self.p_d + self._queue_mass)

    # -- nogoods -----------------------------------------------------------

    def _hits_nogood(self, hyps: FrozenSet[Atom], added: Optional[Atom] = None) -> bool:
        if self._empty_nogood:
            return True
        candidates = (added,) if added is not None else hyps
        for h in candidates:
            for n in self._nogood_index.get(h, ()):
                if n <= hyps:
                    return True
        return False

    def add_nogood(self, hyps: Iterable[Atom]) -> Nogood:
        """Record an inconsistent hypothesis set.

        Queued entries and found explanations that contain it are removed.
        """
        n = frozenset(hyps)
        nogood = Nogood(n)
        self.nogoods.append(nogood)
        if not n:
            self._empty_nogood = True
        for h in n:
            self._nogood_index.setdefault(h, []).append(n)
        for item in self._heap:
            entry = item[3]
            if not entry.dead and n <= entry.hypotheses:
                entry.dead = True
                self._forget(entry)
        kept = [e for e in self.found if not n <= e.hypotheses]
        if len(kept) != len(self.found):
            self.retracted += len(self.found) - len(kept)
            self.found = kept
            self.p_d = math.fsum(e.prior for e in self.found)
        return nogood

    # -- explanations ------------------------------------------------------

    def _record_explanation(self, entry: PartialExplanation) -> Optional[Explanation]:
        d = entry.hypotheses
        if self._hits_nogood(d):
            return None
        for e in self.found:
            if e.hypotheses <= d:
                if e.hypotheses == d:
                    self.duplicates += 1
                else:
                    self.nonminimal += 1
                return None
        supersets = [e for e in self.found if d < e.hypotheses]
        if supersets:
            # Only possible with near-tied priors; keep the set minimal.
            self.retracted += len(supersets)
            self.found = [e for e in self.found if not d < e.hypotheses]
        prior = math.exp(entry.log_prior) if self.log_space else entry.prior
        explanation = Explanation(d, prior)
        self.found.append(explanation)
        self.p_d = math.fsum(e.prior for e in self.found)
        return explanation

    # -- search ------------------------------------------------------------

    def _expand(self, entry: PartialExplanation) -> List[PartialExplanation]:
        a, rest = entry.remaining[0], entry.remaining[1:]
        children = []
        for clause, s in self.kb.matching_rules(a, self.counter):
            remaining = tuple(apply(s, b) for b in clause.body) + tuple(apply(s, b) for b in rest)
            children.append(self._push(entry.goal, remaining, entry.hypotheses, entry.prior, entry.log_prior))
        if a == FALSE:
            return children
        for instance, prior, s in self.kb.assumable_matches(a, self.counter):
            remaining = tuple(apply(s, b) for b in rest)
            if instance in entry.hypotheses:
                children.append(self._push(entry.goal, remaining, entry.hypotheses, entry.prior, entry.log_prior))
                continue
            new_prior = entry.prior * prior
            new_log = entry.log_prior + math.log(prior) if prior > 0 else -math.inf
            if (prior == 0 or (new_prior == 0 and not self.log_space)) and not self.keep_zero:
                self.pruned_zero += 1
                continue
            hyps = entry.hypotheses | {instance}
            if self._hits_nogood(hyps, instance):
                continue
            children.append(self._push(entry.goal, remaining, hyps, new_prior, new_log))
        return children

    def step(self) -> StepOutcome:
        entry = self._pop()
        if entry is None:
            return StepOutcome(StepKind.EXHAUSTED)
        self.expansions += 1
        if entry.remaining:
            return StepOutcome(StepKind.EXPANDED, entry, self._expand(entry))
        if entry.goal is Goal.FALSE:
            if self._hits_nogood(entry.hypotheses):
                return StepOutcome(StepKind.DISCARDED, entry, reason="subsumed nogood")
            return StepOutcome(StepKind.NOGOOD, entry, nogood=self.add_nogood(entry.hypotheses))
        explanation = self._record_explanation(entry)
        if explanation is None:
            return StepOutcome(StepKind.DISCARDED, entry, reason="inconsistent or not minimal")
        return StepOutcome(StepKind.EXPLANATION, entry, explanation=explanation)

    def settled(self) -> bool:
        """No query entries remain, so the explanations and bounds are final.

        Remaining ``false`` entries could only produce nogoods, and any nogood
        contained in a found explanation has a prior at least as large and so
        is always found first.
        """
        return self._user_entries == 0

    def run(self, stop: StopCriteria = EXHAUST, *, drain: bool = False,
            on_step: Optional[Callable[["Search", StepOutcome], None]] = None) -> SearchResult:
        """Step until finished or ``stop`` fires.

        With ``drain`` the search continues until the queue is empty rather
        than stopping once no query entries remain.
        """
        while True:
            reason = self._check_stop(stop)
            if reason is not None:
                break
            if self.settled() and not (drain and self.queue_size):
                reason = Termination.EXHAUSTED
                break
            outcome = self.step()
            if on_step is not None:
                on_step(self, outcome)
        return self.result(reason)

    def _check_stop(self, stop: StopCriteria) -> Optional[Termination]:
        if self.settled():
            return None
        if stop.max_expansions is not None and self.expansions >= stop.max_expansions:
            return Termination.MAX_EXPANSIONS
        if stop.max_explanations is not None and len(self.found) >= stop.max_explanations:
            return Termination.MAX_EXPLANATIONS
        if stop.epsilon is not None and self._queue_mass <= stop.epsilon * max(self.p_d, stop.floor):
            return Termination.EPSILON
        return None

    def result(self, termination: Termination) -> SearchResult:
        lower, upper = self.bounds()
        if termination is Termination.EXHAUSTED:
            upper = lower
        return SearchResult(
            query=self.query,
            explanations=list(self.found),
            nogoods=list(self.nogoods),
            lower=lower,
            upper=upper,
            termination=termination,
            expansions=self.expansions,
            duplicates=self.duplicates,
            nonminimal=self.nonminimal,
            retracted=self.retracted,
        )


def init_search(kb: KnowledgeBase, query: Sequence[Atom], **options) -> Search:
    return Search(kb, query, **options)


def explain(kb: KnowledgeBase, query: Sequence[Atom], stop: StopCriteria = EXHAUST, **options) -> SearchResult:
    """Run a fresh search for ``query`` and return its result."""
    return Search(kb, query, **options).run(stop)
