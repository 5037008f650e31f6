from __future__ import annotations

import random
from pathlib import Path

import pytest

from padlver import elaborate, parse, validate
from padlver.elaborate import ElabArchitecture
from padlver.lts import Lts, build_lts

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_source(name: str) -> str:
    return (FIXTURES / f"{name}.padl").read_text(encoding="utf-8")


def load_arch(name: str, capacity: int = 2) -> ElabArchitecture:
    return elaborate(validate(parse(fixture_source(name))), capacity)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


# ---------------------------------------------------------------------------
# Random LTS generation (seeded, reproducible)
# ---------------------------------------------------------------------------

LABELS = ("a", "b", "c")


def random_lts(rng: random.Random, max_states: int = 8,
               labels: tuple[str, ...] = LABELS, tau_bias: float = 0.3) -> Lts:
    n = rng.randint(1, max_states)
    triples = []
    for s in range(n):
        for _ in range(rng.randint(0, 3)):
            label = "tau" if rng.random() < tau_bias else rng.choice(labels)
            triples.append((s, label, rng.randrange(n)))
    return build_lts(n, 0, triples)


def random_semisync_lts(rng: random.Random, max_states: int = 6,
                        labels: tuple[str, ...] = LABELS) -> Lts:
    n = rng.randint(1, max_states)
    triples = []
    for s in range(n):
        for _ in range(rng.randint(0, 3)):
            label = rng.choice(labels)
            if rng.random() < 0.3:
                triples.append(
                    (s, label, rng.randrange(n), f"O.{label}_exception", rng.randrange(n))
                )
            else:
                kind = "tau" if rng.random() < 0.2 else label
                triples.append((s, kind, rng.randrange(n)))
    return build_lts(n, 0, triples)


def prefix_lts(label: str, lts: Lts) -> Lts:
    """The process label . L: one fresh initial state."""
    triples = [(0, label, lts.initial + 1)]
    for s, ts in enumerate(lts.trans):
        for t in ts:
            triples.append((s + 1, lts.labels[t.label], t.target + 1))
    return build_lts(lts.n_states + 1, 0, triples)


def tau_pad(lts: Lts, rng: random.Random) -> Lts:
    """A weakly bisimilar variant: some transitions take a tau detour."""
    triples = []
    extra = lts.n_states
    for s, ts in enumerate(lts.trans):
        for t in ts:
            if rng.random() < 0.4:
                triples.append((s, lts.labels[t.label], extra))
                triples.append((extra, "tau", t.target))
                extra += 1
            else:
                triples.append((s, lts.labels[t.label], t.target))
    return build_lts(extra, lts.initial, triples)


# ---------------------------------------------------------------------------
# Independent weak-bisimilarity oracle (greatest-fixpoint computation,
# no saturation, no partition refinement)
# ---------------------------------------------------------------------------


def _weak_moves(lts: Lts, state: int) -> dict[str, frozenset[int]]:
    def tau_closure(seed: frozenset[int]) -> frozenset[int]:
        seen = set(seed)
        work = list(seed)
        while work:
            x = work.pop()
            for t in lts.trans[x]:
                if lts.labels[t.label] == "tau" and t.target not in seen:
                    seen.add(t.target)
                    work.append(t.target)
        return frozenset(seen)

    base = tau_closure(frozenset({state}))
    moves: dict[str, set[int]] = {"tau": set(base)}
    for x in base:
        for t in lts.trans[x]:
            name = lts.labels[t.label]
            if name == "tau":
                continue
            moves.setdefault(name, set()).update(tau_closure(frozenset({t.target})))
    return {k: frozenset(v) for k, v in moves.items()}


def naive_weak_bisim(l1: Lts, l2: Lts) -> bool:
    """Greatest fixpoint over state pairs, straight from the
    definition: every single step on one side must be answered by a
    weak move on the other, with related targets.  Quadratic in the
    state product per round; keep inputs small."""
    weak1 = [_weak_moves(l1, s) for s in range(l1.n_states)]
    weak2 = [_weak_moves(l2, s) for s in range(l2.n_states)]
    related = {(p, q) for p in range(l1.n_states) for q in range(l2.n_states)}

    def answered(steps_lts, p, weak_other, q, left_side):
        for t in steps_lts.trans[p]:
            name = steps_lts.labels[t.label]
            answers = weak_other[q].get(name, frozenset())
            pair = (lambda e: (t.target, e)) if left_side else (lambda e: (e, t.target))
            if not any(pair(e) in related for e in answers):
                return False
        return True

    changed = True
    while changed:
        changed = False
        for p, q in list(related):
            if not answered(l1, p, weak2, q, True) or not answered(l2, q, weak1, p, False):
                related.discard((p, q))
                changed = True
    return (l1.initial, l2.initial) in related
