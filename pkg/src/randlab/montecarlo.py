"""Seeded Monte Carlo estimates of event probabilities.

Sample ``i`` of a run uses RNG stream ``i``; the label of node ``σ`` is the
uniform draw at counter ``length_lex_rank(σ)``.  A node's label therefore does
not depend on which nodes were explored before it (lazy sampling is
path-consistent), and splitting the samples between workers cannot change
any individual outcome, so the merged estimate is the same for every worker
count.

Path events are explored level by level along live branches only; a sample
leaves the frontier as soon as its outcome is decided.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng
from .exact import ExactProb, lower, upper
from .functions import Semantics
from .measures import MeasureSpec, digits_from_uniforms, sampling_thresholds
from .oracle import EventKind, EventSpec, PathAutomaton, brute_force_event, path_automaton

MIN_SAMPLES = 100
Z = 3.0


@dataclass(frozen=True)
class Estimate:
    """Frequency estimate with a 3σ normal-approximation band, clipped to [0, 1]."""

    point: float
    ci_low: float
    ci_high: float
    samples: int
    seed: int
    successes: int

    @classmethod
    def from_counts(cls, successes: int, samples: int, seed: int) -> "Estimate":
        p = successes / samples
        half = Z * math.sqrt(p * (1 - p) / samples)
        return cls(p, max(0.0, p - half), min(1.0, p + half), samples, seed, successes)

    def contains(self, value: ExactProb) -> bool:
        return float(lower(value)) <= self.ci_high and float(upper(value)) >= self.ci_low

    def to_json(self) -> dict:
        return {
            "point": self.point,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "samples": self.samples,
            "successes": self.successes,
            "seed": self.seed,
        }


def _thresholds(m: MeasureSpec, depth: int) -> np.ndarray:
    return np.array([sampling_thresholds(m, level) for level in range(1, depth + 1)]).reshape(-1, 2)


def _count_path_event(
    auto: PathAutomaton, cuts: np.ndarray, depth: int, seed: int, start: int, stop: int, batch: int
) -> int:
    if depth == 0:
        return (stop - start) if auto.accept[auto.init] else 0
    if auto.success is not None and auto.init == auto.success:
        return stop - start
    successes = 0
    for b0 in range(start, stop, batch):
        ids = np.arange(b0, min(stop, b0 + batch), dtype=np.uint64)
        keys = rng.stream_keys(seed, ids)
        won = np.zeros(len(ids), dtype=bool)
        sample = np.arange(len(ids))
        rank = np.zeros(len(ids), dtype=np.uint64)
        state = np.full(len(ids), auto.init, dtype=np.int8)
        for level in range(1, depth + 1):
            n = len(sample)
            if n == 0:
                break
            sample = np.repeat(sample, 2)
            state = np.repeat(state, 2)
            # length-lex ranks of the children of a node of rank k are 2k+1 and 2k+2
            rank = np.repeat(rank, 2) * np.uint64(2) + np.tile(np.array([1, 2], dtype=np.uint64), n)
            u = rng.uniforms(keys[sample], rank)
            digit = digits_from_uniforms(u, *cuts[level - 1])
            state = auto.table[state, digit]
            if level == depth:
                won[sample[auto.accept[state]]] = True
                break
            if auto.success is not None:
                won[sample[state == auto.success]] = True
            keep = (state != auto.dead) & ~won[sample]
            sample, state, rank = sample[keep], state[keep], rank[keep]
        successes += int(won.sum())
    return successes


def _count_full_event(e: EventSpec, m: MeasureSpec, seed: int, start: int, stop: int) -> int:
    n_labels = (1 << (e.depth + 1)) - 2
    cuts = _thresholds(m, e.depth)
    levels = np.array([(k + 2).bit_length() - 1 for k in range(n_labels)], dtype=np.int64)
    t0, t1 = cuts[levels - 1, 0], cuts[levels - 1, 1]
    hits = 0
    counters = np.arange(1, n_labels + 1, dtype=np.uint64)
    for i in range(start, stop):
        u = rng.uniforms(rng.stream_keys(seed, [i]), counters)
        labels = np.where(u < t0, 0, np.where(u < t1, 1, 2))
        hits += brute_force_event(e, labels.tolist())
    return hits


def _count(e: EventSpec, m: MeasureSpec, seed: int, start: int, stop: int, batch: int) -> int:
    if e.kind is EventKind.RANGE_CODE_PREFIX:
        return _count_full_event(e, m, seed, start, stop)
    if e.kind is EventKind.TOTAL_TO_DEPTH and e.depth == 0:
        return stop - start
    n = _count_path_event(path_automaton(e), _thresholds(m, e.depth), e.depth, seed, start, stop, batch)
    if e.kind is EventKind.TOTAL_TO_DEPTH:
        # the automaton detects the complement (an input seeing only 2s)
        return (stop - start) - n
    return n


def _check(m: MeasureSpec, e: EventSpec) -> None:
    online = e.kind is EventKind.RANGE_CODE_PREFIX or (
        e.kind is EventKind.HITS_CYLINDER and e.semantics is Semantics.ONLINE
    )
    if online and any(upper(m.triple(lv)[2]) > 0 for lv in range(1, e.depth + 1)):
        raise ValueError("online events need a measure without digit 2")


def estimate_event(
    m: MeasureSpec, e: EventSpec, samples: int, seed: int, workers: int = 1, batch: int = 4096
) -> Estimate:
    if samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples")
    _check(m, e)
    if workers <= 1:
        hits = _count(e, m, seed, 0, samples, batch)
    else:
        bounds = np.linspace(0, samples, workers + 1).astype(int)
        parts = [(int(a), int(b)) for a, b in zip(bounds, bounds[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=len(parts)) as pool:
            futures = [pool.submit(_count, e, m, seed, a, b, batch) for a, b in parts]
            hits = sum(f.result() for f in futures)
    return Estimate.from_counts(hits, samples, seed)


def estimate_range_contains(
    m: MeasureSpec,
    y_prefix: str,
    depth: int,
    samples: int,
    seed: int,
    semantics=Semantics.DELAY,
    workers: int = 1,
) -> Estimate:
    """Fraction of sampled functions whose depth-``depth`` range meets ``⟦y_prefix⟧``."""
    return estimate_event(m, EventSpec.hits_cylinder(y_prefix, semantics, depth), samples, seed, workers)
