"""Bulk property suite over generated well-typed processes.

Every case is produced by the type-directed generator (levels <= 4, type
depth <= 4) and cross-checked against the checker at generation time. The
properties mirror the metatheory: weights never grow along reduction, the
measure strictly shrinks, congruence moves nothing, and every typed process
runs to completion within the exploration bounds.
"""

from __future__ import annotations

import random


from piterm.checker import check
from piterm.measure import measure, multiset_greater
from piterm.semantics import Verdict, explore, normalize, step
from piterm.syntax import Nil, Par, Res, par

from conftest import typed_instance

CASES = 520
_rng = random.Random(987654321)
INSTANCES = [typed_instance(_rng, fuel=7) for _ in range(CASES)]


def congruent_shuffle(rng: random.Random, p):
    """A structurally rearranged process congruent to `p`."""
    n = normalize(p)
    comps = list(n.components)
    rng.shuffle(comps)
    body = par(*comps)
    if rng.random() < 0.5:
        body = Par(body, Nil())
    if rng.random() < 0.5:
        body = Par(Nil(), body)
    order = list(n.restrictions)
    rng.shuffle(order)
    for name, ann, functional in order:
        body = Res(name, ann, functional, body)
    return body


class TestGeneratedCorpus:
    def test_enough_cases(self):
        assert len(INSTANCES) >= 500

    def test_subject_reduction(self):
        for env, p, w in INSTANCES:
            for succ in step(p):
                assert check(env, succ.rebuild()) <= w

    def test_measure_strictly_decreases(self):
        for env, p, _ in INSTANCES:
            m = measure(env, p)
            for succ in step(p):
                assert multiset_greater(m, measure(env, succ.rebuild()))

    def test_congruence_invariance(self):
        rng = random.Random(13)
        for env, p, w in INSTANCES:
            q = congruent_shuffle(rng, p)
            assert check(env, q) == w
            assert measure(env, q) == measure(env, p)

    def test_typed_processes_terminate(self):
        for env, p, _ in INSTANCES:
            report = explore(p, max_states=20000, max_depth=20000)
            assert report.verdict is Verdict.TERMINATED

    def test_subject_reduction_deep(self):
        # follow whole reduction sequences, not just one step
        for env, p, w in INSTANCES[:120]:
            frontier = [(p, w)]
            seen = set()
            while frontier:
                current, bound = frontier.pop()
                for succ in step(current):
                    if succ.key in seen:
                        continue
                    seen.add(succ.key)
                    w2 = check(env, succ.rebuild())
                    assert w2 <= bound
                    frontier.append((succ.rebuild(), w2))

    def test_measure_decreases_along_full_runs(self):
        for env, p, _ in INSTANCES[:120]:
            frontier = [p]
            seen = set()
            while frontier:
                current = frontier.pop()
                m = measure(env, current)
                for succ in step(current):
                    if succ.key in seen:
                        continue
                    seen.add(succ.key)
                    assert multiset_greater(m, measure(env, succ.rebuild()))
                    frontier.append(succ.rebuild())
