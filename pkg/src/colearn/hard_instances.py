"""Adversarial input distributions for the lower-bound constructions.

All three families live on a finite domain with a sink point `bot` that every
hypothesis must map to 0, and draw the target uniformly from the binary
functions that respect that pin. Stated per-point masses are normalized so
each player's non-sink mass is spread uniformly over its own support.
"""

from __future__ import annotations

import numpy as np

from .core import (
    FiniteDomain,
    PlayerInstance,
    PointMassDistribution,
    PointMassOracle,
    TableHypothesis,
)
from .learners import PinnedBinaryClass
from .rng import stream

__all__ = ["HardInstance", "gen_phi", "gen_big_phi", "gen_psi"]

# A HardInstance is a PlayerInstance whose generator metadata is filled in.
HardInstance = PlayerInstance

BOT = "bot"


def _domain(point_names: list[str]) -> tuple[FiniteDomain, PinnedBinaryClass, int]:
    names = tuple(point_names) + (BOT,)
    bot_id = len(names) - 1
    domain = FiniteDomain(names, n_labels=2, pinned=((bot_id, 0),))
    cls = PinnedBinaryClass(len(names), pinned=((bot_id, 0),))
    return domain, cls, bot_id


def _random_target(cls: PinnedBinaryClass, rng: np.random.Generator) -> TableHypothesis:
    index = int(rng.integers(0, 2, size=cls.vc_dimension) @ (1 << np.arange(cls.vc_dimension)))
    return cls.member(index)


def gen_phi(d: int, epsilon: float, seed: int) -> HardInstance:
    """Single player: mass 1-8e on the sink, the rest uniform over d points."""
    if d < 1:
        raise ValueError("d must be at least 1")
    if not 0 < 8 * epsilon < 1:
        raise ValueError("need 8*epsilon in (0, 1)")
    domain, cls, bot_id = _domain([str(i) for i in range(d)])
    target = _random_target(cls, stream(seed, "target"))
    points = np.arange(d + 1)
    masses = np.full(d + 1, 8.0 * epsilon / d)
    masses[bot_id] = 1.0 - 8.0 * epsilon
    dist = PointMassDistribution(points, target.evaluate(points), masses)
    return PlayerInstance(
        oracles=(PointMassOracle(dist, player=0),),
        model=cls,
        dists=(dist,),
        target=target,
        domain=domain,
        instance_id=f"phi(d={d},eps={epsilon},seed={seed})",
        d=d,
        gen_epsilon=epsilon,
        generator="phi",
        gen_seed=seed,
    )


def gen_big_phi(k: int, d: int, epsilon: float, seed: int) -> HardInstance:
    """k players on disjoint blocks of d/k points each, sharing the sink.

    Player i (1-based) owns points (i-1)*d/k .. i*d/k - 1; its non-sink mass
    8e is uniform over that block, so each restriction matches gen_phi(d/k).
    """
    if k < 1 or d <= k:
        raise ValueError("need d > k")
    if d % k != 0:
        raise ValueError("k must divide d")
    if not 0 < 8 * epsilon < 1:
        raise ValueError("need 8*epsilon in (0, 1)")
    block = d // k
    domain, cls, bot_id = _domain([str(i) for i in range(d)])
    target = _random_target(cls, stream(seed, "target"))
    dists = []
    for i in range(k):
        points = np.concatenate([np.arange(i * block, (i + 1) * block), [bot_id]])
        masses = np.full(block + 1, 8.0 * epsilon / block)
        masses[-1] = 1.0 - 8.0 * epsilon
        dists.append(PointMassDistribution(points, target.evaluate(points), masses))
    return PlayerInstance(
        oracles=tuple(PointMassOracle(dist, player=i) for i, dist in enumerate(dists)),
        model=cls,
        dists=tuple(dists),
        target=target,
        domain=domain,
        instance_id=f"bigphi(k={k},d={d},eps={epsilon},seed={seed})",
        d=d,
        gen_epsilon=epsilon,
        generator="bigphi",
        gen_seed=seed,
    )


def gen_psi(k: int, d: int, epsilon: float, seed: int) -> HardInstance:
    """d base players duplicated k/d times, then randomly permuted.

    Base player i is a fair coin away from being trivial: with probability 1/2
    all its mass sits on the sink, otherwise mass 2e sits on its private point
    i (named "1".."d") and the rest on the sink. Duplicates are exact copies
    of their base player; the stored permutation maps final position to base
    layout so tests can invert the shuffle.
    """
    if k < 1 or d < 1 or d > k:
        raise ValueError("need 1 <= d <= k")
    if k % d != 0:
        raise ValueError("d must divide k")
    if not 0 < 2 * epsilon < 1:
        raise ValueError("need 2*epsilon in (0, 1)")
    domain, cls, bot_id = _domain([str(i + 1) for i in range(d)])
    target = _random_target(cls, stream(seed, "target"))
    active = stream(seed, "active").random(d) < 0.5
    base = []
    for i in range(d):
        if active[i]:
            points = np.array([i, bot_id])
            masses = np.array([2.0 * epsilon, 1.0 - 2.0 * epsilon])
        else:
            points = np.array([bot_id])
            masses = np.array([1.0])
        base.append(PointMassDistribution(points, target.evaluate(points), masses))
    duplicated = [base[j % d] for j in range(k)]
    permutation = stream(seed, "perm").permutation(k)
    dists = [duplicated[permutation[j]] for j in range(k)]
    return PlayerInstance(
        oracles=tuple(PointMassOracle(dist, player=i) for i, dist in enumerate(dists)),
        model=cls,
        dists=tuple(dists),
        target=target,
        domain=domain,
        instance_id=f"psi(k={k},d={d},eps={epsilon},seed={seed})",
        d=d,
        gen_epsilon=epsilon,
        generator="psi",
        gen_seed=seed,
        permutation=permutation,
    )
