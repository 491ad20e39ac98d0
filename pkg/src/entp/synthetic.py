"""Seeded synthetic regression scenarios for desk-scale experiments."""

from __future__ import annotations

import math
from typing import Optional, Tuple

import numpy as np

from .errors import InvalidParams
from .io import write_snapshot
from .model import FailureRecord, SuiteSnapshot

__all__ = ["gen_synthetic"]


def _check_frac(name, x, closed=False):
    ok = 0 <= x <= 1 if closed else 0 < x < 1
    if not ok:
        interval = "[0, 1]" if closed else "(0, 1)"
        raise InvalidParams(f"{name} must lie in {interval}, got {x}")


def gen_synthetic(
    n: int = 100,
    blocks: int = 200,
    delta_frac: float = 0.05,
    imbalance: float = 2.0,
    fail_frac: float = 0.1,
    seed: int = 0,
    correlation: float = 0.8,
    out=None,
) -> Tuple[SuiteSnapshot, FailureRecord]:
    """Generate coverage, traces, costs and failures for ``n`` tests.

    Costs are ``100 * 10**(imbalance * u)`` rounded, ``u ~ U[0, 1)``, so
    ``imbalance`` is the spread in decades and 0 gives uniform costs.  Exactly
    ``round(fail_frac * n)`` tests fail; a test's chance of failing mixes its
    delta coverage (weight ``correlation``) with a uniform share.

    When ``out`` is given the files are written there in canonical form.
    """
    if isinstance(n, bool) or int(n) != n or n < 2:
        raise InvalidParams(f"n must be an integer >= 2, got {n}")
    if isinstance(blocks, bool) or int(blocks) != blocks or blocks < 2:
        raise InvalidParams(f"blocks must be an integer >= 2, got {blocks}")
    _check_frac("delta_frac", delta_frac)
    _check_frac("fail_frac", fail_frac)
    _check_frac("correlation", correlation, closed=True)
    if not imbalance >= 0:
        raise InvalidParams(f"imbalance must be >= 0, got {imbalance}")
    if not 0 <= seed < 2**64:
        raise InvalidParams(f"seed must be an unsigned 64-bit integer, got {seed}")
    n, blocks = int(n), int(blocks)

    rng = np.random.default_rng(seed)
    n_delta = max(1, math.floor(delta_frac * blocks + 0.5))
    # block 0 is the entry block every test runs through
    delta = frozenset(int(b) for b in rng.choice(np.arange(1, blocks), size=min(n_delta, blocks - 1), replace=False))
    instr = rng.integers(1, 40, size=blocks)

    cov, traces = [], []
    for _ in range(n):
        k = 1 + int(rng.binomial(blocks - 2, 0.15))
        body = rng.choice(np.arange(1, blocks), size=k, replace=False)
        path = [0] + [int(b) for b in body]
        for _ in range(int(rng.integers(0, k + 1))):
            pos = int(rng.integers(1, len(path) + 1))
            path.insert(pos, path[int(rng.integers(0, pos))])
        cov.append(frozenset(path))
        traces.append(tuple((b, int(instr[b])) for b in path))

    u = rng.random(n)
    cost = tuple(int(c) for c in np.maximum(1, np.rint(100.0 * 10.0 ** (imbalance * u))))

    m = math.floor(fail_frac * n + 0.5)
    rel = np.array([len(c & delta) / len(delta) for c in cov])
    share = rel / rel.sum() if rel.sum() > 0 else np.full(n, 1.0 / n)
    p = correlation * share + (1 - correlation) / n + 1e-9
    p /= p.sum()
    failed = rng.choice(n, size=m, replace=False, p=p) if m else []

    snapshot = SuiteSnapshot(cov=tuple(cov), delta=delta, cost=cost, traces=tuple(traces))
    failures = FailureRecord(int(t) for t in failed)
    if out is not None:
        write_snapshot(snapshot, out, failures)
    return snapshot, failures
