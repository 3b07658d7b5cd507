"""Known-plaintext attack: recover an equivalent key from two image pairs.

Two plaintext/ciphertext image pairs under one key give, per block k, the
observation J1'(k) ^ J2'(k) = ((J1(k)+sub) mod 2^n) ^ ((J2(k)+sub) mod 2^n)
where sub is key1 for B(k) in {2,3} and key2 for B(k) in {0,1}.  Each block
therefore yields partial bits of one of the two subkeys; conflicting partial
solutions are clustered into two seeds, one per subkey, and the per-block
selector is reconstructed from the seed assignment plus the parity of
J1'(k) ^ J1(k).  Bit n-1 of either subkey never matters for decryption, so
the recovered keys carry bits 0..n-2 only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mckba.block_codec import BlockStream, blocks_to_image, image_to_blocks
from mckba.kernel_solver import (
    InconsistentObservationError,
    KernelInstance,
    PartialKeyObservation,
    solve_batch,
)


CLASS_A = 0
CLASS_B = 1
UNASSIGNED = -1

AMBIGUOUS_KEYCLASS = -1  # selector placeholder when the key class is unknown


class MergeFailureError(ValueError):
    """No pair of partial solutions conflicts: the seeds cannot be split."""


class InternalConsistencyError(RuntimeError):
    """Observations contradict the two-subkey structure (corrupt input or bug)."""


@dataclass
class SeedMergeResult:
    """Outcome of clustering partial key observations into the two subkeys."""

    n: int
    key1_value: int
    key1_mask: int
    key2_value: int
    key2_mask: int
    assignments: np.ndarray  # int8 per block: CLASS_A, CLASS_B or UNASSIGNED
    rounds: int
    seed_pairs: int

    @property
    def unassigned_count(self) -> int:
        return int(np.sum(self.assignments == UNASSIGNED))


@dataclass
class EquivalentKey:
    """Recovered subkeys (bits 0..n-2) plus per-block selector estimates."""

    n: int
    key1_star: int
    key2_star: int
    key1_mask: int
    key2_mask: int
    selectors: np.ndarray  # int8 per block, AMBIGUOUS_KEYCLASS when unresolved
    parity_even: np.ndarray  # bool per block: True when B(k) must be in {1,3}
    merge_stats: dict | None = None  # seed-merge diagnostics for reporting

    @property
    def block_count(self) -> int:
        return len(self.selectors)

    @property
    def ambiguous_indices(self) -> list[int]:
        return [int(k) for k in np.flatnonzero(self.selectors == AMBIGUOUS_KEYCLASS)]

    def swapped(self) -> "EquivalentKey":
        """The equivalent key with the subkeys exchanged and selectors shifted by 2."""
        sel = self.selectors.copy()
        live = sel != AMBIGUOUS_KEYCLASS
        sel[live] = (sel[live] + 2) % 4
        return EquivalentKey(
            n=self.n,
            key1_star=self.key2_star,
            key2_star=self.key1_star,
            key1_mask=self.key2_mask,
            key2_mask=self.key1_mask,
            selectors=sel,
            parity_even=self.parity_even.copy(),
            merge_stats=self.merge_stats,
        )


def merge_statistics(merge: SeedMergeResult) -> dict:
    """Reporting summary of a seed-merge outcome."""
    return {
        "rounds": merge.rounds,
        "seed_pairs": merge.seed_pairs,
        "class_a_blocks": int(np.sum(merge.assignments == CLASS_A)),
        "class_b_blocks": int(np.sum(merge.assignments == CLASS_B)),
        "unassigned_blocks": merge.unassigned_count,
        "key1_confirmed_bits": merge.key1_mask.bit_count(),
        "key2_confirmed_bits": merge.key2_mask.bit_count(),
    }


def _low_mask(n: int) -> int:
    return (1 << (n - 1)) - 1


def differential_observations(p1, p2, c1, c2, n: int) -> list[KernelInstance]:
    """Per-block kernel instances from two known plaintext/ciphertext pairs."""
    imgs = [np.asarray(im) for im in (p1, p2, c1, c2)]
    shape = imgs[0].shape
    for im in imgs[1:]:
        if im.shape != shape:
            raise ValueError(f"image dimensions differ: {im.shape} vs {shape}")
    height, width = shape
    if (8 * width * height) % n:
        raise ValueError(f"word size {n} must divide the image bit count")
    j1 = image_to_blocks(imgs[0], n).words
    j2 = image_to_blocks(imgs[1], n).words
    e1 = image_to_blocks(imgs[2], n).words
    e2 = image_to_blocks(imgs[3], n).words
    y = e1 ^ e2
    return [
        KernelInstance(n=n, alpha=int(j1[k]), beta=int(j2[k]), y=int(y[k]), block_index=k)
        for k in range(len(j1))
    ]


def solve_blocks(instances: list[KernelInstance]) -> list[PartialKeyObservation]:
    """Solve every block's kernel instance; unknown bits are left zero."""
    if not instances:
        return []
    n = instances[0].n
    alpha = np.fromiter((inst.alpha for inst in instances), dtype=np.uint64, count=len(instances))
    beta = np.fromiter((inst.beta for inst in instances), dtype=np.uint64, count=len(instances))
    y = np.fromiter((inst.y for inst in instances), dtype=np.uint64, count=len(instances))
    value, mask, _, _, bad = solve_batch(alpha, beta, y, n)
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise InconsistentObservationError(
            f"block {instances[k].block_index}: observation matches no key"
        )
    return [
        PartialKeyObservation(value=int(value[k]), mask=int(mask[k]), block_index=instances[k].block_index)
        for k in range(len(instances))
    ]


def _conflicts(value_a: int, mask_a: int, value_b: int, mask_b: int) -> bool:
    common = mask_a & mask_b
    return bool((value_a ^ value_b) & common)


class _Seed:
    __slots__ = ("value", "mask")

    def __init__(self, value: int = 0, mask: int = 0):
        self.value = value
        self.mask = mask

    def absorb(self, value: int, mask: int) -> bool:
        if _conflicts(self.value, self.mask, value, mask):
            raise InternalConsistencyError("absorbing a conflicting element")
        grew = bool(mask & ~self.mask)
        self.value |= value & ~self.mask
        self.mask |= mask
        return grew


def merge_seeds(observations: list[PartialKeyObservation], n: int) -> SeedMergeResult:
    """Cluster per-block partial solutions into the two subkeys.

    Two maximally-confirmed conflicting observations seed the two classes;
    every observation conflicting with one seed has its confirmed bits folded
    into the other, repeatedly until neither seed grows.  Fresh seed pairs are
    drawn from the leftovers while at least two remain and the seeds are not
    yet complete on bits 0..n-2.
    """
    if not observations:
        raise MergeFailureError("no observations to merge")
    block_count = max(obs.block_index for obs in observations) + 1
    assignments = np.full(block_count, UNASSIGNED, dtype=np.int8)
    full = _low_mask(n)

    pool = sorted(
        (obs for obs in observations if obs.mask),
        key=lambda obs: (-obs.confirmed_count, obs.block_index),
    )
    sides: list[_Seed] | None = None
    rounds = 0
    seed_pairs = 0

    def find_conflicting_pair():
        # identical (value, mask) copies conflict with exactly the same things,
        # so scanning first occurrences finds the same pair as the full scan
        seen: set[tuple[int, int]] = set()
        firsts: list[int] = []
        for j, obs in enumerate(pool):
            pattern = (obs.value, obs.mask)
            if pattern in seen:
                continue
            seen.add(pattern)
            for i in firsts:
                if _conflicts(pool[i].value, pool[i].mask, obs.value, obs.mask):
                    return i, j
            firsts.append(j)
        return None

    while len(pool) >= 2:
        if sides is not None and sides[0].mask == full and sides[1].mask == full:
            break
        pair = find_conflicting_pair()
        if pair is None:
            if sides is None:
                raise MergeFailureError(
                    "no two observations disagree on a commonly confirmed bit"
                )
            break
        first = pool[pair[0]]
        second = pool[pair[1]]
        del pool[pair[1]], pool[pair[0]]
        seed_pairs += 1

        if sides is None:
            sides = [_Seed(first.value, first.mask), _Seed(second.value, second.mask)]
            assignments[first.block_index] = CLASS_A
            assignments[second.block_index] = CLASS_B
        else:
            placed = False
            for obs in (first, second):
                hit_a = _conflicts(obs.value, obs.mask, sides[0].value, sides[0].mask)
                hit_b = _conflicts(obs.value, obs.mask, sides[1].value, sides[1].mask)
                if hit_a and hit_b:
                    raise InternalConsistencyError(
                        f"block {obs.block_index} conflicts with both seeds"
                    )
                if hit_a or hit_b:
                    side = CLASS_B if hit_a else CLASS_A
                    sides[side].absorb(obs.value, obs.mask)
                    assignments[obs.block_index] = side
                    other = second if obs is first else first
                    other_side = 1 - side
                    sides[other_side].absorb(other.value, other.mask)
                    assignments[other.block_index] = other_side
                    placed = True
                    break
            if not placed:
                # orientable to neither side; identical copies never will be
                # either (sides are unchanged), so retire the whole pattern
                drop = {(first.value, first.mask), (second.value, second.mask)}
                pool = [o for o in pool if (o.value, o.mask) not in drop]
                continue

        grew = True
        while grew:
            grew = False
            rounds += 1
            remaining = []
            for obs in pool:
                hit_a = _conflicts(obs.value, obs.mask, sides[0].value, sides[0].mask)
                hit_b = _conflicts(obs.value, obs.mask, sides[1].value, sides[1].mask)
                if hit_a and hit_b:
                    raise InternalConsistencyError(
                        f"block {obs.block_index} conflicts with both seeds"
                    )
                if hit_a or hit_b:
                    side = CLASS_B if hit_a else CLASS_A
                    grew |= sides[side].absorb(obs.value, obs.mask)
                    assignments[obs.block_index] = side
                else:
                    remaining.append(obs)
            pool = remaining

    if sides is None:
        raise MergeFailureError("no two observations disagree on a commonly confirmed bit")

    return SeedMergeResult(
        n=n,
        key1_value=sides[0].value,
        key1_mask=sides[0].mask,
        key2_value=sides[1].value,
        key2_mask=sides[1].mask,
        assignments=assignments,
        rounds=rounds,
        seed_pairs=seed_pairs,
    )


def _decrypt_word(word: int, sub: int, b: int, n: int) -> int:
    mask = (1 << n) - 1
    tmp = word ^ sub
    if b in (0, 2):
        tmp ^= mask
    return (tmp - sub) & mask


def recover_selectors(
    p1_words: np.ndarray,
    c1_words: np.ndarray,
    merge: SeedMergeResult,
    observations: list[PartialKeyObservation],
    extra_pairs: tuple = (),
) -> tuple[np.ndarray, np.ndarray]:
    """Per-block selector estimates B*(k) plus the parity class of each block.

    The key class comes from the merge assignment (equivalently, from any
    confirmed bit at a position where the recovered subkeys differ); the
    operation within the class comes from the parity of J1'(k) ^ J1(k).
    Blocks whose class neither source settles are tested directly against the
    known plaintext/ciphertext words: the class whose decryption reproduces
    every known pair wins.  Only when both classes survive that test is the
    block reported as ambiguous.
    """
    n = merge.n
    block_count = len(p1_words)
    parity_even = ((p1_words ^ c1_words) & np.uint64(1)) == 0
    selectors = np.full(block_count, AMBIGUOUS_KEYCLASS, dtype=np.int8)

    known_pairs = [(p1_words, c1_words), *extra_pairs]
    diff_positions = merge.key1_mask & merge.key2_mask & (merge.key1_value ^ merge.key2_value)
    obs_by_block = {obs.block_index: obs for obs in observations}

    for k in range(block_count):
        side = int(merge.assignments[k])
        if side == UNASSIGNED:
            obs = obs_by_block.get(k)
            if obs is not None and obs.mask & diff_positions:
                pos = (obs.mask & diff_positions & -(obs.mask & diff_positions)).bit_length() - 1
                bit = (obs.value >> pos) & 1
                side = CLASS_A if bit == ((merge.key1_value >> pos) & 1) else CLASS_B
        if side == UNASSIGNED:
            # last resort: check which subkey actually decrypts the known blocks
            if parity_even[k]:
                candidates = [(CLASS_A, merge.key1_value, 3), (CLASS_B, merge.key2_value, 1)]
            else:
                candidates = [(CLASS_A, merge.key1_value, 2), (CLASS_B, merge.key2_value, 0)]
            hits = [
                cls
                for cls, sub, b in candidates
                if all(
                    _decrypt_word(int(cw[k]), sub, b, n) == int(pw[k])
                    for pw, cw in known_pairs
                )
            ]
            if len(hits) == 1:
                side = hits[0]
        if side == UNASSIGNED:
            continue  # genuinely ambiguous; parity class still recorded
        if parity_even[k]:
            selectors[k] = 3 if side == CLASS_A else 1
        else:
            selectors[k] = 2 if side == CLASS_A else 0
    return selectors, parity_even


def kpa_attack(p1, c1, p2, c2, n: int) -> EquivalentKey:
    """Full known-plaintext attack from two image pairs under one key."""
    instances = differential_observations(p1, p2, c1, c2, n)
    observations = solve_blocks(instances)
    merge = merge_seeds(observations, n)
    p1_words = image_to_blocks(np.asarray(p1), n).words
    c1_words = image_to_blocks(np.asarray(c1), n).words
    p2_words = image_to_blocks(np.asarray(p2), n).words
    c2_words = image_to_blocks(np.asarray(c2), n).words
    selectors, parity_even = recover_selectors(
        p1_words, c1_words, merge, observations, extra_pairs=((p2_words, c2_words),)
    )
    full = _low_mask(n)
    if merge.key1_mask == full and merge.key2_mask == full and merge.key1_value == merge.key2_value:
        raise InternalConsistencyError("both seeds resolved to the same subkey")
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


def decrypt_with_equivalent(c_image, ek: EquivalentKey, policy: str = "key1") -> tuple[np.ndarray, dict]:
    """Decrypt a cipher image with a recovered equivalent key.

    Ambiguous blocks are decrypted according to ``policy`` (currently only
    "key1": assume the key1-side operation of the known parity class) and
    flagged in the returned report.
    """
    if policy != "key1":
        raise ValueError(f"unknown ambiguity policy {policy!r}")
    c_image = np.asarray(c_image)
    blocks = image_to_blocks(c_image, ek.n)
    if blocks.block_count != ek.block_count:
        raise ValueError(
            f"equivalent key covers {ek.block_count} blocks, image has {blocks.block_count}"
        )
    selectors = ek.selectors.copy()
    ambiguous = ek.ambiguous_indices
    for k in ambiguous:
        selectors[k] = 3 if ek.parity_even[k] else 2

    mask = np.uint64((1 << ek.n) - 1)
    out = np.empty_like(blocks.words)
    for b in range(4):
        pick = selectors == b
        if not np.any(pick):
            continue
        sub = np.uint64(ek.key1_star if b >= 2 else ek.key2_star)
        tmp = blocks.words[pick] ^ sub
        if b in (0, 2):
            tmp ^= mask
        out[pick] = (tmp - sub) & mask
    image = blocks_to_image(BlockStream(ek.n, out, blocks.pad_bits, blocks.source_dims))
    report = {
        "total_blocks": int(ek.block_count),
        "ambiguous_blocks": ambiguous,
        "ambiguous_count": len(ambiguous),
        "policy": policy,
    }
    return image, report
