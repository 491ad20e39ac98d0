"""The 16 standalone prioritization heuristics and ensemble assembly.

Every prioritizer is a pure function of a :class:`SuiteSnapshot` returning a
:class:`StrictRanking`.  Scores are computed with exact rationals so that ties
are real ties, and every tie is broken by ascending test id.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import ConfigError, EmptyTrace, InvalidParams, MalformedFile, MissingTraces, NonPositiveCost
from .io import require_delta
from .model import Ensemble, StrictRanking, SuiteSnapshot
from .validation import check_snapshot

__all__ = [
    "RELCON_WEIGHTS",
    "STRATEGIES",
    "DisplacementProfile",
    "EnsembleConfig",
    "rel_scores",
    "con_scores",
    "prioritize_rel",
    "prioritize_con",
    "prioritize_relcon",
    "prioritize_cost",
    "prioritize_ga",
    "prioritize_costga",
    "linearize_trace",
    "displacement_profile",
    "colosseum_score",
    "prioritize_colosseum",
    "prioritize",
    "build_ensemble",
    "read_ensemble_config",
    "Prioritizer",
    "EnsembleBuilder",
]

RELCON_WEIGHTS = tuple(range(10, 100, 10))


def _relcon_label(w: int) -> str:
    return f"relcon_{w}_{100 - w}"


def _by_score(scores: Sequence, descending: bool) -> StrictRanking:
    sign = -1 if descending else 1
    return StrictRanking(sorted(range(len(scores)), key=lambda t: (sign * scores[t], t)))


def _check_costs(s: SuiteSnapshot) -> None:
    for t, c in enumerate(s.cost):
        if not c > 0:
            raise NonPositiveCost(t)


# -- delta coverage ---------------------------------------------------------


def rel_scores(s: SuiteSnapshot) -> List[Fraction]:
    """Fraction of the change set each test covers."""
    require_delta(s)
    d = len(s.delta)
    return [Fraction(len(c & s.delta), d) for c in s.cov]


def con_scores(s: SuiteSnapshot) -> List[Fraction]:
    """``1 / (1 + |cov(t) - delta|)``: high when a test stays inside the change."""
    require_delta(s)
    return [Fraction(1, 1 + len(c - s.delta)) for c in s.cov]


def prioritize_rel(s: SuiteSnapshot) -> StrictRanking:
    return _by_score(rel_scores(s), descending=True)


def prioritize_con(s: SuiteSnapshot) -> StrictRanking:
    return _by_score(con_scores(s), descending=True)


def prioritize_relcon(s: SuiteSnapshot, w_rel) -> StrictRanking:
    """Largest ``w_rel * rel + (1 - w_rel) * con`` first."""
    w = Fraction(str(w_rel))
    if not 0 <= w <= 1:
        raise InvalidParams(f"w_rel must lie in [0, 1], got {w_rel}")
    rel, con = rel_scores(s), con_scores(s)
    return _by_score([w * r + (1 - w) * c for r, c in zip(rel, con)], descending=True)


def prioritize_cost(s: SuiteSnapshot) -> StrictRanking:
    _check_costs(s)
    return _by_score([Fraction(c) for c in s.cost], descending=False)


def _greedy_additional(s: SuiteSnapshot, key: Callable[[int, int], Fraction]) -> StrictRanking:
    # key(test, new_blocks) ranks candidates; zero gain everywhere resets coverage
    require_delta(s)
    dcov = [c & s.delta for c in s.cov]
    remaining = list(range(s.n))
    covered: set = set()
    order = []
    while remaining:
        gains = {t: len(dcov[t] - covered) for t in remaining}
        if covered and not any(gains.values()):
            covered = set()
            continue
        best = min(remaining, key=lambda t: (-key(t, gains[t]), t))
        order.append(best)
        remaining.remove(best)
        covered |= dcov[best]
    return StrictRanking(order)


def prioritize_ga(s: SuiteSnapshot) -> StrictRanking:
    """Greedy additional: most not-yet-covered delta blocks first."""
    return _greedy_additional(s, lambda t, gain: Fraction(gain))


def prioritize_costga(s: SuiteSnapshot) -> StrictRanking:
    """Greedy additional by new delta blocks per unit of cost."""
    _check_costs(s)
    cost = [Fraction(c) for c in s.cost]
    return _greedy_additional(s, lambda t, gain: gain / cost[t])


# -- delta displacement -----------------------------------------------------


@dataclass(frozen=True)
class DisplacementProfile:
    """Where the change sits along a linearized trace.

    ``alpha``: distance from the path start to the first delta block.
    ``gamma``: distance from the last delta block to the path end.
    ``beta``: mean distance between consecutive delta blocks (0 with fewer than two).
    ``hits``: number of delta blocks on the path.
    """

    alpha: Fraction
    beta: Fraction
    gamma: Fraction
    hits: int


def linearize_trace(path):
    """Keep the first visit of every block, preserving order.

    Accepts plain block ids or ``(block, instruction_count)`` pairs.
    """
    if not path:
        raise EmptyTrace("<path>")
    seen = set()
    out = []
    for step in path:
        b = step[0] if isinstance(step, (tuple, list)) else step
        if b not in seen:
            seen.add(b)
            out.append(step)
    return type(path)(out) if isinstance(path, (tuple, list)) else out


def displacement_profile(path, delta, weighted: bool = False) -> DisplacementProfile:
    """Displacement of ``delta`` blocks along a ``(block, instr_count)`` path.

    The path is linearized first.  Moving from position ``i`` to ``j`` costs the
    summed weight of the blocks at ``i..j-1``; a block weighs 1, or its
    instruction count when ``weighted``.
    """
    path = linearize_trace(tuple(path))
    w = [Fraction(c) if weighted else Fraction(1) for _, c in path]
    prefix = [Fraction(0)]
    for x in w:
        prefix.append(prefix[-1] + x)

    def dist(i, j):
        return prefix[j] - prefix[i]

    hits = [i for i, (b, _) in enumerate(path) if b in delta]
    if not hits:
        return DisplacementProfile(Fraction(0), Fraction(0), Fraction(0), 0)
    last = len(path) - 1
    alpha = dist(0, hits[0])
    gamma = dist(hits[-1], last)
    if len(hits) > 1:
        gaps = [dist(i, j) for i, j in zip(hits, hits[1:])]
        beta = sum(gaps, Fraction(0)) / len(gaps)
    else:
        beta = Fraction(0)
    return DisplacementProfile(alpha, beta, gamma, len(hits))


def colosseum_score(profile: DisplacementProfile) -> Fraction:
    """Combined displacement; smaller runs earlier.  Swap this to change policy."""
    return profile.alpha + profile.beta + profile.gamma


def prioritize_colosseum(s: SuiteSnapshot, weighted: bool) -> StrictRanking:
    """Shortest delta displacement first; traces that miss the change go last."""
    require_delta(s)
    if s.traces is None:
        raise MissingTraces("colosseum prioritization needs traces for every test")
    touched, missed = [], []
    for t, path in enumerate(s.traces):
        prof = displacement_profile(path, s.delta, weighted)
        if prof.hits:
            touched.append((colosseum_score(prof), t))
        else:
            missed.append(t)
    return StrictRanking([t for _, t in sorted(touched)] + missed)


# -- registry and ensembles -------------------------------------------------


def _relcon_strategy(w):
    return lambda s: prioritize_relcon(s, Fraction(w, 100))


STRATEGIES: Dict[str, Callable[[SuiteSnapshot], StrictRanking]] = {
    "rel": prioritize_rel,
    "con": prioritize_con,
    "cost": prioritize_cost,
    "ga": prioritize_ga,
    "costga": prioritize_costga,
    **{_relcon_label(w): _relcon_strategy(w) for w in RELCON_WEIGHTS},
    "coluw": lambda s: prioritize_colosseum(s, weighted=False),
    "colw": lambda s: prioritize_colosseum(s, weighted=True),
}

TRACE_STRATEGIES = frozenset({"coluw", "colw"})


def prioritize(s: SuiteSnapshot, label: str) -> StrictRanking:
    try:
        fn = STRATEGIES[label]
    except KeyError:
        raise ConfigError(f"unknown strategy {label!r}") from None
    return fn(s)


@dataclass(frozen=True)
class EnsembleConfig:
    """Ordered ``(label, multiplicity)`` pairs; the default has 25 entries."""

    entries: Tuple[Tuple[str, int], ...] = (
        ("rel", 1),
        ("con", 1),
        ("cost", 4),
        ("ga", 1),
        ("costga", 1),
        *((_relcon_label(w), 1) for w in RELCON_WEIGHTS),
        ("coluw", 1),
        ("colw", 7),
    )

    def __post_init__(self):
        entries = tuple((str(label), int(k)) for label, k in self.entries)
        if not entries:
            raise ConfigError("ensemble config is empty")
        seen = set()
        for label, k in entries:
            if label not in STRATEGIES:
                raise ConfigError(f"unknown strategy {label!r}")
            if label in seen:
                raise ConfigError(f"strategy {label!r} listed twice")
            if k < 1:
                raise ConfigError(f"multiplicity of {label!r} must be >= 1, got {k}")
            seen.add(label)
        object.__setattr__(self, "entries", entries)

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(label for label, _ in self.entries)

    @property
    def size(self) -> int:
        return sum(k for _, k in self.entries)

    @property
    def needs_traces(self) -> bool:
        return any(label in TRACE_STRATEGIES for label in self.labels)

    def without_traces(self) -> "EnsembleConfig":
        return EnsembleConfig(tuple(e for e in self.entries if e[0] not in TRACE_STRATEGIES))

    @classmethod
    def uniform(cls) -> "EnsembleConfig":
        return cls(tuple((label, 1) for label in STRATEGIES))


def read_ensemble_config(path) -> EnsembleConfig:
    entries = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        label, _, k = line.partition(",")
        if lineno == 1 and k.strip() == "multiplicity":
            continue
        try:
            entries.append((label.strip(), int(k) if k.strip() else 1))
        except ValueError:
            raise MalformedFile(path, lineno, "expected 'label,multiplicity'") from None
    return EnsembleConfig(tuple(entries))


def standalone_rankings(s: SuiteSnapshot, labels: Sequence[str]) -> Dict[str, StrictRanking]:
    if s.traces is None and any(label in TRACE_STRATEGIES for label in labels):
        raise MissingTraces("coluw/colw configured but the snapshot has no traces")
    return {label: prioritize(s, label) for label in labels}


def build_ensemble(s: SuiteSnapshot, cfg: Optional[EnsembleConfig] = None) -> Ensemble:
    """Run each configured strategy once and repeat it per its multiplicity."""
    cfg = EnsembleConfig() if cfg is None else cfg
    ranked = standalone_rankings(s, cfg.labels)
    return Ensemble((label, ranked[label]) for label, k in cfg.entries for _ in range(k))


class Prioritizer(BaseEstimator):
    """One standalone heuristic as an estimator.

    ``fit(snapshot)`` stores the ranking in ``ranking_``.
    """

    def __init__(self, strategy="rel"):
        self.strategy = strategy

    def fit(self, X, y=None):
        s = check_snapshot(X)
        self.ranking_ = prioritize(s, self.strategy)
        return self

    def fit_predict(self, X, y=None) -> StrictRanking:
        return self.fit(X).ranking_


class EnsembleBuilder(TransformerMixin, BaseEstimator):
    """Snapshot -> Ensemble transformer, the first step of a consensus pipeline.

    Parameters
    ----------
    config : EnsembleConfig or None
        ``None`` means the default 25-ranking configuration.
    """

    def __init__(self, config=None):
        self.config = config

    def fit(self, X, y=None):
        self.ensemble_ = build_ensemble(check_snapshot(X), self.config)
        return self

    def transform(self, X) -> Ensemble:
        check_is_fitted(self, "ensemble_")
        return build_ensemble(check_snapshot(X), self.config)

    def fit_transform(self, X, y=None, **fit_params) -> Ensemble:
        return self.fit(X).ensemble_
