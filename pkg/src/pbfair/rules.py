"""Budgeted multi-winner rules: utilitarian greedy, equal shares, Phragmén.

Money is integral and all derived quantities (per-utility prices, voter
balances, purchase times) are exact `fractions.Fraction` values, so ties are
real ties and never artifacts of rounding.

Ties on a rule's own selection key are broken by the tie-break order:

``cost_asc`` (default)
    cheaper project first, then smaller project id (string order)
``cost_desc``
    more expensive project first, then smaller project id
``file_order``
    the project listed first in the election wins
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from pbfair.ballots import utilities

TIEBREAKS = ("cost_asc", "cost_desc", "file_order")
DEFAULT_TIEBREAK = "cost_asc"


class NoBallots(ValueError):
    """A rule that needs at least one voter was given none."""


@dataclass(frozen=True)
class Selection:
    """One step of a rule's audit trail.

    ``key`` is what the rule ranked by: total utility for greedy and the
    completion phase, the price per unit of utility for equal shares, the
    purchase time for Phragmén.
    """

    project: str
    round: int
    key: object
    phase: str = "main"
    charges: Optional[dict] = None


@dataclass
class Outcome:
    rule: str
    winners: list
    spend: int
    budget: int
    audit: list = field(default_factory=list)
    endowment_used: Optional[Fraction] = None
    tiebreak: str = DEFAULT_TIEBREAK

    @property
    def feasible(self) -> bool:
        """Spend within budget. Plain equal shares with a raised endowment may overspend."""
        return self.spend <= self.budget

    @property
    def winner_set(self) -> frozenset:
        return frozenset(self.winners)

    def to_dict(self) -> dict:
        """JSON-ready form; rationals are written as ``"p/q"`` strings."""
        return {
            "rule": self.rule,
            "tiebreak": self.tiebreak,
            "budget": self.budget,
            "spend": self.spend,
            "endowment_used": _num(self.endowment_used),
            "winners": list(self.winners),
            "audit": [
                {
                    "project": s.project,
                    "round": s.round,
                    "key": _num(s.key),
                    "phase": s.phase,
                }
                for s in self.audit
            ],
        }


def _num(x):
    if x is None or isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return x


class _Profile:
    """Utilities arranged per project, shared by all rules."""

    def __init__(self, election, tiebreak):
        if tiebreak not in TIEBREAKS:
            raise ValueError(f"unknown tiebreak {tiebreak!r}; choose from {TIEBREAKS}")
        self.budget = election.budget
        self.ids = [p.id for p in election.projects]
        self.cost = {p.id: p.cost for p in election.projects}
        self.voters = [b.voter_id for b in election.ballots]
        profile = utilities(election)
        self.supporters = {pid: [] for pid in self.ids}
        self.total = {pid: 0 for pid in self.ids}
        for i, vid in enumerate(self.voters):
            for pid, u in profile[vid].items():
                if u > 0:
                    self.supporters[pid].append((i, u))
                    self.total[pid] += u
        position = {pid: k for k, pid in enumerate(self.ids)}
        if tiebreak == "cost_asc":
            self.tb = {pid: (self.cost[pid], pid) for pid in self.ids}
        elif tiebreak == "cost_desc":
            self.tb = {pid: (-self.cost[pid], pid) for pid in self.ids}
        else:
            self.tb = {pid: (position[pid],) for pid in self.ids}
        self.tiebreak = tiebreak

    def greedy_order(self, pool=None):
        pool = self.ids if pool is None else pool
        return sorted(pool, key=lambda p: (-self.total[p], self.tb[p]))


def utilitarian_greedy(election, tiebreak: str = DEFAULT_TIEBREAK) -> Outcome:
    """Fund projects by decreasing total utility while they fit the budget.

    Unaffordable projects are skipped and the scan continues down the list.
    """
    prof = _Profile(election, tiebreak)
    remaining = prof.budget
    winners, audit = [], []
    for pid in prof.greedy_order():
        if prof.cost[pid] <= remaining:
            remaining -= prof.cost[pid]
            audit.append(Selection(pid, len(winners), prof.total[pid]))
            winners.append(pid)
    return Outcome("greedy", winners, prof.budget - remaining, prof.budget, audit, tiebreak=tiebreak)


def compute_rho(cost, endowments, utils) -> Optional[Fraction]:
    """Smallest price per unit of utility at which supporters can pay ``cost``.

    Each supporter ``i`` pays ``min(endowments[i], rho * utils[i])``. Returns
    None when the supporters together hold less than ``cost``.

    >>> compute_rho(150, [60, 100], [1, 1])
    Fraction(90, 1)
    """
    if len(endowments) != len(utils):
        raise ValueError("endowments and utils differ in length")
    if any(u <= 0 for u in utils):
        raise ValueError("utilities of supporters must be positive")
    if sum(endowments) < cost:
        return None
    order = sorted(range(len(utils)), key=lambda i: Fraction(endowments[i], 1) / utils[i])
    rest_cost = Fraction(cost)
    rest_util = sum(utils)
    last_ratio = Fraction(0)
    for i in order:
        ratio = Fraction(endowments[i], 1) / utils[i]
        if ratio * rest_util >= rest_cost:
            return rest_cost / rest_util
        rest_cost -= endowments[i]
        rest_util -= utils[i]
        last_ratio = ratio
    # every supporter is capped: total endowment equals the cost exactly
    return last_ratio


def _rho(cost, balances, supporters):
    """`compute_rho` over a supporter list ``[(voter index, utility), ...]``."""
    total = 0
    for i, _ in supporters:
        total += balances[i]
    if total < cost:
        return None
    ranked = sorted(supporters, key=lambda s: balances[s[0]] / s[1])
    rest_cost = Fraction(cost)
    rest_util = sum(u for _, u in supporters)
    last_ratio = Fraction(0)
    for i, u in ranked:
        ratio = balances[i] / u
        if ratio * rest_util >= rest_cost:
            return rest_cost / rest_util
        rest_cost -= balances[i]
        rest_util -= u
        last_ratio = ratio
    return last_ratio


def _equal_shares(prof, endowment, pool=None):
    """Core equal-shares loop; returns (winners, audit)."""
    endowment = Fraction(endowment)
    balances = [endowment] * len(prof.voters)
    candidates = [p for p in (prof.ids if pool is None else pool) if prof.supporters[p]]
    # prices only rise as balances fall, so the last computed price is a lower bound
    lower = {p: Fraction(0) for p in candidates}
    winners, audit = [], []
    while candidates:
        candidates.sort(key=lambda p: (lower[p], prof.tb[p]))
        best, best_key = None, None
        for p in list(candidates):
            if best is not None and lower[p] > best_key[0]:
                break
            rho = _rho(prof.cost[p], balances, prof.supporters[p])
            if rho is None:
                candidates.remove(p)
                continue
            lower[p] = rho
            key = (rho, prof.tb[p])
            if best is None or key < best_key:
                best, best_key = p, key
        if best is None:
            break
        rho = best_key[0]
        charges = {}
        for i, u in prof.supporters[best]:
            pay = min(balances[i], rho * u)
            balances[i] -= pay
            charges[prof.voters[i]] = pay
        audit.append(Selection(best, len(winners), rho, "main", charges))
        winners.append(best)
        candidates.remove(best)
    return winners, audit


def method_of_equal_shares(
    election,
    endowment_per_voter=None,
    tiebreak: str = DEFAULT_TIEBREAK,
    base: str = "exact",
) -> Outcome:
    """Method of Equal Shares without completion.

    Every voter starts with ``endowment_per_voter``. Defaults to the budget
    divided by the number of voters, either as an exact rational
    (``base="exact"``) or rounded down to whole currency units
    (``base="floor"``). Projects are bought cheapest-per-utility first until
    none is affordable.
    """
    prof = _Profile(election, tiebreak)
    n = len(prof.voters)
    if endowment_per_voter is None:
        if n == 0:
            raise NoBallots("equal shares needs at least one ballot")
        if base == "exact":
            endowment_per_voter = Fraction(prof.budget, n)
        elif base == "floor":
            endowment_per_voter = Fraction(prof.budget // n)
        else:
            raise ValueError(f"base must be 'exact' or 'floor', got {base!r}")
    elif endowment_per_voter <= 0:
        raise ValueError("endowment per voter must be positive")
    winners, audit = _equal_shares(prof, endowment_per_voter)
    spend = sum(prof.cost[p] for p in winners)
    return Outcome(
        "mes",
        winners,
        spend,
        prof.budget,
        audit,
        Fraction(endowment_per_voter),
        tiebreak,
    )


def _add1_linear(prof, base, cap_total):
    n = len(prof.voters)
    best_k, best = 0, _equal_shares(prof, base)
    k = 1
    while (base + k) * n <= cap_total:
        result = _equal_shares(prof, base + k)
        if sum(prof.cost[p] for p in result[0]) > prof.budget:
            break
        best_k, best = k, result
        k += 1
    return best_k, best


def _add1_fast(prof, base, cap_total):
    """Doubling then bisection over the increment count.

    Finds the same increment as `_add1_linear` whenever feasibility is
    monotone in the endowment, which is what the linear scan relies on in
    practice; the acceptance suite compares the two on every corpus file.
    """
    n = len(prof.voters)
    k_max = (cap_total // n) - base if n else 0
    cache = {}

    def run(k):
        if k not in cache:
            winners, audit = _equal_shares(prof, base + k)
            cache[k] = (sum(prof.cost[p] for p in winners) <= prof.budget, (winners, audit))
        return cache[k]

    if k_max <= 0:
        return 0, run(0)[1]
    lo, hi = 0, None
    step = 1
    while True:
        k = min(step, k_max)
        if run(k)[0]:
            lo = k
            if k == k_max:
                return k, run(k)[1]
            step *= 2
        else:
            hi = k
            break
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if run(mid)[0]:
            lo = mid
        else:
            hi = mid
    return lo, run(lo)[1]


def equal_shares_add1u(
    election,
    tiebreak: str = DEFAULT_TIEBREAK,
    search: str = "fast",
    cap_multiple: int = 2,
) -> Outcome:
    """Equal shares with Add1 endowment raising and utilitarian completion.

    Endowments run over ``floor(B/n) + k`` for ``k = 0, 1, ...`` and the
    largest ``k`` before the first over-budget outcome is kept (or the last
    one with total endowment within ``cap_multiple * B``). Leftover budget is
    then filled greedily by total utility. ``search="linear"`` scans ``k``
    one by one; ``"fast"`` doubles then bisects.
    """
    prof = _Profile(election, tiebreak)
    n = len(prof.voters)
    if n == 0:
        raise NoBallots("equal shares needs at least one ballot")
    base = prof.budget // n
    cap_total = cap_multiple * prof.budget
    if search == "linear":
        k, (winners, audit) = _add1_linear(prof, base, cap_total)
    elif search == "fast":
        k, (winners, audit) = _add1_fast(prof, base, cap_total)
    else:
        raise ValueError(f"search must be 'fast' or 'linear', got {search!r}")
    winners, audit = list(winners), list(audit)
    spend = sum(prof.cost[p] for p in winners)
    chosen = set(winners)
    for pid in prof.greedy_order([p for p in prof.ids if p not in chosen]):
        if spend + prof.cost[pid] <= prof.budget:
            spend += prof.cost[pid]
            audit.append(Selection(pid, len(winners), prof.total[pid], "completion"))
            winners.append(pid)
    return Outcome("mes-add1u", winners, spend, prof.budget, audit, Fraction(base + k), tiebreak)


def phragmen_sequential(election, tiebreak: str = DEFAULT_TIEBREAK) -> Outcome:
    """Sequential Phragmén with continuous income, budget-constrained.

    Voters approve the projects they give positive utility. Each earns money
    at rate 1; a project is bought as soon as its supporters jointly hold its
    cost, emptying their balances. Projects costing more than the remaining
    budget are dropped.
    """
    prof = _Profile(election, tiebreak)
    if not prof.voters:
        raise NoBallots("Phragmén needs at least one ballot")
    last_reset = [Fraction(0)] * len(prof.voters)
    remaining = prof.budget
    pool = [p for p in prof.ids if prof.supporters[p]]
    winners, audit = [], []
    while True:
        pool = [p for p in pool if prof.cost[p] <= remaining]
        if not pool:
            break
        best, best_key = None, None
        for p in pool:
            sup = prof.supporters[p]
            t = (prof.cost[p] + sum(last_reset[i] for i, _ in sup)) / Fraction(len(sup))
            key = (t, prof.tb[p])
            if best is None or key < best_key:
                best, best_key = p, key
        t = best_key[0]
        for i, _ in prof.supporters[best]:
            last_reset[i] = t
        remaining -= prof.cost[best]
        audit.append(Selection(best, len(winners), t))
        winners.append(best)
        pool.remove(best)
    return Outcome("phragmen", winners, prof.budget - remaining, prof.budget, audit, tiebreak=tiebreak)


RULES = {
    "greedy": utilitarian_greedy,
    "mes": method_of_equal_shares,
    "mes-add1u": equal_shares_add1u,
    "phragmen": phragmen_sequential,
}


def run_rule(name: str, election, **options) -> Outcome:
    """Run a rule by its registry name (see `RULES`)."""
    try:
        rule = RULES[name]
    except KeyError:
        raise ValueError(f"unknown rule {name!r}; choose from {sorted(RULES)}") from None
    return rule(election, **options)
