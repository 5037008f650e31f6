"""Randomized soundness harness for the reduction driver.

Generates small random architectures (random behaviors, random
tree-plus-chord topologies, mixed synchronicity qualifiers) and checks
that whenever the compositional conditions hold, the reduction verdict
matches the direct whole-system model check.  This is the strongest
desk-scale evidence the driver can offer beyond the bundled fixtures.
"""

from __future__ import annotations

import random

from padlver import elaborate, validate
from padlver import model as m
from padlver.diagnostics import StateLimitExceeded
from padlver.topology import verify_deadlock_by_reduction, verify_deadlock_direct

_SYNCS = (
    [m.Synchronicity.SYNC] * 4
    + [m.Synchronicity.SSYNC] * 1
    + [m.Synchronicity.ASYNC] * 1
)


def random_architecture(rng: random.Random) -> m.ArchiDescription:
    n = rng.randint(2, 4)
    names = [f"N_{i}" for i in range(1, n + 1)]
    edges: list[tuple[int, int]] = []
    for i in range(1, n):
        edges.append((rng.randrange(i), i))
    if n >= 3 and rng.random() < 0.6:
        candidates = [
            (i, j)
            for i in range(n)
            for j in range(i + 1, n)
            if (i, j) not in edges and (j, i) not in edges
        ]
        if candidates:
            edges.append(rng.choice(candidates))

    decls: dict[str, list[m.InteractionDecl]] = {nm: [] for nm in names}
    attachments = []
    for k, (i, j) in enumerate(edges):
        if rng.random() < 0.5:
            src, dst = names[i], names[j]
        else:
            src, dst = names[j], names[i]
        out, inp = f"snd_{k}", f"rcv_{k}"
        decls[src].append(
            m.InteractionDecl(out, m.Direction.OUTPUT, m.Multiplicity.UNI, rng.choice(_SYNCS))
        )
        decls[dst].append(
            m.InteractionDecl(inp, m.Direction.INPUT, m.Multiplicity.UNI, rng.choice(_SYNCS))
        )
        attachments.append(m.Attachment(src, out, dst, inp))

    aets, instances = [], []
    for nm in names:
        inters = decls[nm]
        pool = [d.name for d in inters] + [f"w{rng.randint(0, 1)}"]
        eq_names = [f"B{e}" for e in range(rng.randint(1, 2))]
        equations = []
        used: set[str] = set()
        for eqn in eq_names:
            branches = []
            for _ in range(rng.randint(1, 3)):
                chain = [rng.choice(pool) for _ in range(rng.randint(1, 3))]
                used.update(chain)
                body: m.ProcessBody = (
                    m.Stop() if rng.random() < 0.06 else m.Invoke(rng.choice(eq_names), ())
                )
                for action in reversed(chain):
                    body = m.Prefix(action, body)
                branches.append(m.Branch(None, body))
            equations.append(m.BehaviorEquation(eqn, (), m.Choice(tuple(branches))))
        missing = [d.name for d in inters if d.name not in used]
        if missing:
            extra = list(equations[0].body.branches)
            for action in missing:
                extra.append(m.Branch(None, m.Prefix(action, m.Invoke(eq_names[0], ()))))
            equations[0] = m.BehaviorEquation(eq_names[0], (), m.Choice(tuple(extra)))
        aets.append(m.AetDef(f"{nm}_Type", (), tuple(equations), tuple(inters)))
        instances.append(m.Instance(nm, f"{nm}_Type", ()))
    return m.ArchiDescription(
        "Random_AT", (), tuple(aets), tuple(instances), (), tuple(attachments)
    )


def test_reduction_agrees_with_direct_on_random_architectures():
    rng = random.Random(4242)
    held = skipped = 0
    for _ in range(400):
        description = random_architecture(rng)
        arch = elaborate(validate(description), capacity=rng.randint(1, 2))
        try:
            reduction = verify_deadlock_by_reduction(arch, state_limit=100_000)
            direct = verify_deadlock_direct(arch, state_limit=100_000)
        except StateLimitExceeded:
            skipped += 1
            continue
        if direct.status == "inconclusive" or reduction.status == "inconclusive":
            skipped += 1
            continue
        if reduction.status == "conditions_failed":
            continue
        held += 1
        assert reduction.status == direct.status, (
            f"reduction={reduction.status} direct={direct.status} on\n{description}"
        )
    # the generator must actually exercise the transfer, in both verdicts
    assert held >= 30, f"only {held} random architectures satisfied the conditions"


def test_random_architectures_cover_both_verdicts():
    rng = random.Random(77997)
    verdicts = set()
    for _ in range(200):
        description = random_architecture(rng)
        arch = elaborate(validate(description), capacity=1)
        try:
            reduction = verify_deadlock_by_reduction(arch, state_limit=200_000)
        except StateLimitExceeded:
            continue
        if reduction.status in ("deadlock_free", "deadlock"):
            direct = verify_deadlock_direct(arch, state_limit=200_000)
            assert reduction.status == direct.status
            verdicts.add(reduction.status)
    assert "deadlock_free" in verdicts
    assert "deadlock" in verdicts
