"""Chosen-plaintext attack: two crafted images pin down both subkeys exactly.

Each block of the two chosen images carries one of two query pairs for the
kernel equation.  Against the same unknown x, the responses of the two pairs
leave at least one informative plane at every bit position, so x mod 2^(n-1)
is determined completely by walking the planes once with both carry chains.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from mckba.block_codec import BlockStream, blocks_to_image, image_to_blocks
from mckba.kernel_solver import InconsistentObservationError
from mckba.kpa import (
    CLASS_A,
    CLASS_B,
    EquivalentKey,
    InternalConsistencyError,
    MergeFailureError,
    SeedMergeResult,
    differential_observations,
    merge_seeds,
    merge_statistics,
    recover_selectors,
    solve_blocks,
)

PAIR_A = 0
PAIR_B = 1


class CoverageError(RuntimeError):
    """A key class lacks the query material needed to pin down all its bits."""


@dataclass
class QueryPair:
    """One chosen (alpha, beta) query for the kernel equation."""

    alpha: int
    beta: int
    tag: int  # PAIR_A or PAIR_B


def _alternating(n: int, first_bit: int) -> int:
    """Bits first_bit, first_bit+2, ... set, truncated to n bits."""
    return sum(1 << j for j in range(first_bit, n, 2))


def corollary_queries(n: int) -> tuple[QueryPair, QueryPair]:
    """The two query pairs: (0, 0b..1010) and (0b..1010, 0b..0101)."""
    if n < 2:
        raise ValueError(f"word size must be at least 2, got {n}")
    a_pattern = _alternating(n, 1)
    s_pattern = _alternating(n, 0)
    return (
        QueryPair(alpha=0, beta=a_pattern, tag=PAIR_A),
        QueryPair(alpha=a_pattern, beta=s_pattern, tag=PAIR_B),
    )


def build_chosen_images(width: int, height: int, n: int, seed: int):
    """Two chosen plain-images with a per-block random query tag.

    Returns (p1, p2, tags); block k of (p1, p2) carries the (alpha, beta) of
    query PAIR_A or PAIR_B according to tags[k].  The tag record must be kept
    for recovery.
    """
    if width <= 0 or height <= 0:
        raise ValueError(f"invalid dimensions {width}x{height}")
    total_bits = 8 * width * height
    if total_bits % n:
        raise ValueError(f"word size {n} must divide the image bit count")
    pair_a, pair_b = corollary_queries(n)
    block_count = total_bits // n
    rng = random.Random(seed)
    tags = np.fromiter((rng.randrange(2) for _ in range(block_count)), dtype=np.int8, count=block_count)
    j1 = np.where(tags == PAIR_A, np.uint64(pair_a.alpha), np.uint64(pair_b.alpha))
    j2 = np.where(tags == PAIR_A, np.uint64(pair_a.beta), np.uint64(pair_b.beta))
    p1 = blocks_to_image(BlockStream(n, j1, 0, (width, height)))
    p2 = blocks_to_image(BlockStream(n, j2, 0, (width, height)))
    return p1, p2, tags


def _maj(x: int, a: int, c: int) -> int:
    return (x & a) ^ (x & c) ^ (a & c)


def joint_query_solver(y_tilde_a: int, y_tilde_b: int, n: int) -> int:
    """Solve x mod 2^(n-1) from the masked responses of both query pairs.

    Walks the bit planes once, tracking both carry chains of both queries;
    at every plane exactly one value of x[i] reproduces the observed next
    bits.  Transitions are evaluated directly from the carry recurrences.
    """
    pair_a, pair_b = corollary_queries(n)
    if (y_tilde_a & 1) or (y_tilde_b & 1):
        raise InconsistentObservationError("bit 0 of a masked response must be 0")
    ca = cta = cb = ctb = 0
    x = 0
    for i in range(n - 1):
        aa = (pair_a.alpha >> i) & 1
        ba = (pair_a.beta >> i) & 1
        ab = (pair_b.alpha >> i) & 1
        bb = (pair_b.beta >> i) & 1
        want_a = (y_tilde_a >> (i + 1)) & 1
        want_b = (y_tilde_b >> (i + 1)) & 1
        matches = []
        for xv in (0, 1):
            na, nta = _maj(xv, aa, ca), _maj(xv, ba, cta)
            nb, ntb = _maj(xv, ab, cb), _maj(xv, bb, ctb)
            if (na ^ nta) == want_a and (nb ^ ntb) == want_b:
                matches.append((xv, na, nta, nb, ntb))
        if not matches:
            raise InconsistentObservationError(f"plane {i}: responses match no x")
        if len(matches) > 1:
            raise InconsistentObservationError(f"plane {i}: responses leave x[{i}] open")
        xv, ca, cta, cb, ctb = matches[0]
        x |= xv << i
    return x


def _complete_side(side_name, side, other, instances, observations, tags, merge, values, masks, n):
    """Pin down all bits of one key class via the two-query joint solver.

    Prefers a pair of blocks the merge assigned to the class; when the merge
    captured only one query tag, candidate blocks of the missing tag are
    validated by requiring the joint solution to reproduce both the class's
    merged bits and the candidate's own confirmed bits (a wrong pairing fails
    one of these or admits no solution at all).
    """
    have: dict[int, int] = {}
    for k in np.flatnonzero(merge.assignments == side):
        have.setdefault(int(tags[k]), int(k))
        if len(have) == 2:
            break
    if not have:
        raise InternalConsistencyError(f"key class {side_name} has no member blocks")

    def joint_for(block_a: int, block_b: int) -> int:
        return joint_query_solver(instances[block_a].y_tilde, instances[block_b].y_tilde, n)

    if len(have) == 2:
        x = joint_for(have[PAIR_A], have[PAIR_B])
        if (x ^ values[side]) & masks[side]:
            raise InternalConsistencyError(
                f"key class {side_name}: joint solution contradicts merged bits"
            )
        return x

    (known_tag, known_block), = have.items()
    missing = PAIR_B if known_tag == PAIR_A else PAIR_A
    solutions: dict[int, int] = {}
    seen_patterns = set()
    for k in range(len(instances)):
        if int(tags[k]) != missing or int(merge.assignments[k]) == other:
            continue
        pattern = (instances[k].alpha, instances[k].beta, instances[k].y)
        if pattern in seen_patterns:
            continue
        seen_patterns.add(pattern)
        pair = (known_block, k) if known_tag == PAIR_A else (k, known_block)
        try:
            x = joint_for(*pair)
        except InconsistentObservationError:
            continue
        obs = observations[k]
        if (x ^ values[side]) & masks[side] or (x ^ obs.value) & obs.mask:
            continue
        solutions.setdefault(x, k)
    if len(solutions) != 1:
        raise CoverageError(
            f"key class {side_name}: cannot pair query tags "
            f"({len(solutions)} consistent joint solutions)"
        )
    return next(iter(solutions))


def cpa_recover(p1, c1, p2, c2, tags: np.ndarray, n: int) -> EquivalentKey:
    """Recover the equivalent key from the chosen images and their encryptions."""
    instances = differential_observations(p1, p2, c1, c2, n)
    tags = np.asarray(tags, dtype=np.int8)
    if len(tags) != len(instances):
        raise ValueError(f"tag record covers {len(tags)} blocks, images have {len(instances)}")
    observations = solve_blocks(instances)
    try:
        merge = merge_seeds(observations, n)
    except MergeFailureError as exc:
        raise CoverageError(f"cannot split the key classes: {exc}") from exc

    full = (1 << (n - 1)) - 1
    values = [merge.key1_value, merge.key2_value]
    masks = [merge.key1_mask, merge.key2_mask]
    for side, other, side_name in ((CLASS_A, CLASS_B, "A"), (CLASS_B, CLASS_A, "B")):
        if masks[side] == full:
            continue
        values[side] = _complete_side(
            side_name, side, other, instances, observations, tags, merge, values, masks, n
        )
        masks[side] = full
    if values[CLASS_A] == values[CLASS_B]:
        raise InternalConsistencyError("both key classes resolved to the same subkey")

    merge = SeedMergeResult(
        n=n,
        key1_value=values[CLASS_A],
        key1_mask=masks[CLASS_A],
        key2_value=values[CLASS_B],
        key2_mask=masks[CLASS_B],
        assignments=merge.assignments,
        rounds=merge.rounds,
        seed_pairs=merge.seed_pairs,
    )
    p1_words = image_to_blocks(np.asarray(p1), n).words
    c1_words = image_to_blocks(np.asarray(c1), n).words
    p2_words = image_to_blocks(np.asarray(p2), n).words
    c2_words = image_to_blocks(np.asarray(c2), n).words
    selectors, parity_even = recover_selectors(
        p1_words, c1_words, merge, observations, extra_pairs=((p2_words, c2_words),)
    )
    return EquivalentKey(
        n=n,
        key1_star=merge.key1_value,
        key2_star=merge.key2_value,
        key1_mask=merge.key1_mask,
        key2_mask=merge.key2_mask,
        selectors=selectors,
        parity_even=parity_even,
        merge_stats=merge_statistics(merge),
    )
