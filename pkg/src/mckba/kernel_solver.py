"""Bit-plane solver for the kernel equation y = ((a+x) mod 2^n) ^ ((b+x) mod 2^n).

Writing yt = y ^ a ^ b, the bit planes obey

    yt[i+1] = c[i+1] ^ ct[i+1]
    c[i+1]  = maj(x[i], a[i], c[i])      (carry of x+a into plane i+1)
    ct[i+1] = maj(x[i], b[i], ct[i])     (carry of x+b into plane i+1)

with c[0] = ct[0] = 0, hence ct[i] = c[i] ^ yt[i] throughout.  Sweeping the
planes from the LSB upward and classifying each plane by (a[i], b[i], yt[i])
pins down individual bits of x:

    index in {0,6}: yt[i+1] is forced to 0, nothing about x[i] is learnable;
    index in {1,7}: x[i] = a[i] ^ yt[i+1] unconditionally;
    index in {2,4}: x[i] ^ c[i] = yt[i+1], so x[i] follows once c[i] is known;
    index in {3,5}: c[i] = b[i] ^ yt[i+1], revealing the incoming carry and,
                    retroactively, x[i-1] when exactly one of the plane-(i-1)
                    carry inputs is set.

Carries are forwarded between planes whenever the majority form already
determines them.  A second full sweep lets retroactively revealed carries
unlock the paired-bit rule on planes that were passed over.  Bit n-1 is never
solvable: the equation only constrains x modulo 2^(n-1).

The solver only ever asserts bits that are forced; soundness is checked
exhaustively against brute-force enumeration in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

NO_INFO = "NO_INFO"
DIRECT_X = "DIRECT_X"
LINKED_PAIR = "LINKED_PAIR"
CARRY_REVEAL = "CARRY_REVEAL"

_CASE_BY_INDEX = (
    NO_INFO,      # (a,b,yt) = (0,0,0)
    DIRECT_X,     # (0,0,1)
    LINKED_PAIR,  # (0,1,0)
    CARRY_REVEAL,  # (0,1,1)
    LINKED_PAIR,  # (1,0,0)
    CARRY_REVEAL,  # (1,0,1)
    NO_INFO,      # (1,1,0)
    DIRECT_X,     # (1,1,1)
)

SOLVE_SWEEPS = 2


class InconsistentObservationError(ValueError):
    """The observed (alpha, beta, y) triple cannot come from any x."""


@dataclass
class KernelInstance:
    """One observed kernel equation."""

    n: int
    alpha: int
    beta: int
    y: int
    block_index: int = -1

    @property
    def y_tilde(self) -> int:
        return self.y ^ self.alpha ^ self.beta


@dataclass
class PartialKeyObservation:
    """Solved bits of x for one block: value holds confirmed bits, mask marks them."""

    value: int
    mask: int
    block_index: int = -1

    def __post_init__(self):
        if self.value & ~self.mask:
            raise ValueError("value has bits outside the confirmed mask")

    @property
    def confirmed_count(self) -> int:
        return self.mask.bit_count()


def eval_kernel(alpha: int, beta: int, x: int, n: int) -> int:
    """((alpha+x) mod 2^n) ^ ((beta+x) mod 2^n)."""
    mask = (1 << n) - 1
    return (((alpha + x) & mask) ^ ((beta + x) & mask))


def _maj(x: int, a: int, c: int) -> int:
    return (x & a) ^ (x & c) ^ (a & c)


def next_row(x_i: int, c_i: int, c_tilde_i: int, alpha_i: int, beta_i: int):
    """One bit-plane step: returns (c[i+1], ct[i+1], yt[i+1])."""
    for v in (x_i, c_i, c_tilde_i, alpha_i, beta_i):
        if v not in (0, 1):
            raise ValueError("next_row arguments must be single bits")
    c_next = _maj(x_i, alpha_i, c_i)
    ct_next = _maj(x_i, beta_i, c_tilde_i)
    return c_next, ct_next, c_next ^ ct_next


def classify_case(alpha_i: int, beta_i: int, y_tilde_i: int) -> str:
    """Which solving rule the plane (a[i], b[i], yt[i]) admits."""
    for v in (alpha_i, beta_i, y_tilde_i):
        if v not in (0, 1):
            raise ValueError("classify_case arguments must be single bits")
    return _CASE_BY_INDEX[4 * alpha_i + 2 * beta_i + y_tilde_i]


def solve_single_query(
    alpha: int,
    beta: int,
    y: int,
    n: int,
    block_index: int = -1,
    trace: list | None = None,
) -> PartialKeyObservation:
    """Recover every forced bit among x[0..n-2] from one (alpha, beta, y) triple.

    Raises InconsistentObservationError when the observation contradicts the
    bit-plane relations.  If ``trace`` is a list, one entry per processed
    plane is appended describing the rule applied (debugging aid).
    """
    limit = 1 << n
    if not (0 <= alpha < limit and 0 <= beta < limit and 0 <= y < limit):
        raise ValueError(f"alpha, beta, y must be {n}-bit words")
    yt = y ^ alpha ^ beta
    if yt & 1:
        raise InconsistentObservationError("bit 0 of y ^ alpha ^ beta must be 0")

    x: list[int | None] = [None] * n
    c: list[int | None] = [None] * n
    c[0] = 0

    def set_x(i: int, v: int) -> bool:
        if x[i] is None:
            x[i] = v
            return True
        if x[i] != v:
            raise InconsistentObservationError(f"conflicting value for x[{i}]")
        return False

    def set_c(i: int, v: int) -> bool:
        if i >= n:
            return False
        if c[i] is None:
            c[i] = v
            return True
        if c[i] != v:
            raise InconsistentObservationError(f"conflicting value for carry c[{i}]")
        return False

    for sweep in range(SOLVE_SWEEPS):
        for i in range(n - 1):
            a = (alpha >> i) & 1
            b = (beta >> i) & 1
            y0 = (yt >> i) & 1
            y1 = (yt >> (i + 1)) & 1
            case = _CASE_BY_INDEX[4 * a + 2 * b + y0]
            learned: list[str] = []

            if case == NO_INFO:
                if y1 != 0:
                    raise InconsistentObservationError(
                        f"plane {i}: equal addend bits force yt[{i + 1}] = 0"
                    )
            elif case == DIRECT_X:
                if set_x(i, a ^ y1):
                    learned.append(f"x{i}={x[i]}")
            elif case == LINKED_PAIR:
                if c[i] is not None:
                    if set_x(i, c[i] ^ y1):
                        learned.append(f"x{i}={x[i]}")
            else:  # CARRY_REVEAL
                if set_c(i, b ^ y1):
                    learned.append(f"c{i}={c[i]}")
                # retroactive bit: c[i] = maj(x[i-1], a[i-1], c[i-1]) collapses
                # to x[i-1] when exactly one of (a[i-1], c[i-1]) is set
                if i >= 1 and x[i - 1] is None and c[i - 1] is not None:
                    am1 = (alpha >> (i - 1)) & 1
                    bm1 = (beta >> (i - 1)) & 1
                    ctm1 = c[i - 1] ^ ((yt >> (i - 1)) & 1)
                    cti = c[i] ^ y0
                    if am1 + c[i - 1] == 1:
                        set_x(i - 1, c[i])
                        learned.append(f"x{i - 1}={x[i - 1]} (retro)")
                    elif bm1 + ctm1 == 1:
                        set_x(i - 1, cti)
                        learned.append(f"x{i - 1}={x[i - 1]} (retro)")

            # forward the outgoing carry whenever the majority form is pinned
            if x[i] is not None and c[i] is not None:
                if set_c(i + 1, _maj(x[i], a, c[i])):
                    learned.append(f"c{i + 1}={c[i + 1]}")
            else:
                if c[i] is not None:
                    ct = c[i] ^ y0
                    if a == c[i]:
                        if set_c(i + 1, c[i]):
                            learned.append(f"c{i + 1}={c[i + 1]}")
                    elif b == ct:
                        if set_c(i + 1, ct ^ y1):
                            learned.append(f"c{i + 1}={c[i + 1]}")
                if x[i] is not None:
                    if x[i] == a:
                        if set_c(i + 1, x[i]):
                            learned.append(f"c{i + 1}={c[i + 1]}")
                    elif x[i] == b:
                        if set_c(i + 1, x[i] ^ y1):
                            learned.append(f"c{i + 1}={c[i + 1]}")

            if trace is not None and (sweep == 0 or learned):
                trace.append(
                    f"sweep {sweep + 1} plane {i}: case={case}"
                    + (" " + ", ".join(learned) if learned else "")
                )

    value = 0
    mask = 0
    for i in range(n - 1):
        if x[i] is not None:
            mask |= 1 << i
            value |= x[i] << i
    return PartialKeyObservation(value=value, mask=mask, block_index=block_index)


def solve_batch(alpha: np.ndarray, beta: np.ndarray, y: np.ndarray, n: int):
    """Vectorised twin of solve_single_query over many instances.

    Returns (x_value, x_mask, c_value, c_mask, inconsistent) where the first
    four are uint64 bit masks per instance and ``inconsistent`` flags
    observations that contradict the bit-plane relations (their masks are not
    meaningful).  Agreement with the scalar solver is enforced by tests.
    """
    alpha = np.asarray(alpha, dtype=np.uint64)
    beta = np.asarray(beta, dtype=np.uint64)
    y = np.asarray(y, dtype=np.uint64)
    count = len(alpha)
    yt = y ^ alpha ^ beta

    x_val = np.zeros((count, n), dtype=bool)
    x_kn = np.zeros((count, n), dtype=bool)
    c_val = np.zeros((count, n), dtype=bool)
    c_kn = np.zeros((count, n), dtype=bool)
    c_kn[:, 0] = True
    bad = np.zeros(count, dtype=bool)

    def column(arr: np.ndarray, i: int) -> np.ndarray:
        return ((arr >> np.uint64(i)) & np.uint64(1)).astype(bool)

    def assign(val: np.ndarray, kn: np.ndarray, i: int, v: np.ndarray, where: np.ndarray):
        known = kn[:, i]
        conflict = where & known & (val[:, i] != v)
        bad[conflict] = True
        fresh = where & ~known
        val[fresh, i] = v[fresh]
        kn[fresh, i] = True

    ybit = column(yt, 0)
    bad |= ybit  # yt bit 0 must be 0

    for _sweep in range(SOLVE_SWEEPS):
        for i in range(n - 1):
            a = column(alpha, i)
            b = column(beta, i)
            y0 = column(yt, i)
            y1 = column(yt, i + 1)

            no_info = (a == b) & ~y0
            direct = (a == b) & y0
            linked = (a != b) & ~y0
            reveal = (a != b) & y0

            bad |= no_info & y1
            assign(x_val, x_kn, i, a ^ y1, direct)
            assign(x_val, x_kn, i, c_val[:, i] ^ y1, linked & c_kn[:, i])
            assign(c_val, c_kn, i, b ^ y1, reveal)
            if i >= 1:
                retro = reveal & ~x_kn[:, i - 1] & c_kn[:, i - 1]
                am1 = column(alpha, i - 1)
                bm1 = column(beta, i - 1)
                ctm1 = c_val[:, i - 1] ^ column(yt, i - 1)
                cti = c_val[:, i] ^ y0
                first = retro & (am1 != c_val[:, i - 1])
                second = retro & ~first & (bm1 != ctm1)
                assign(x_val, x_kn, i - 1, c_val[:, i], first)
                assign(x_val, x_kn, i - 1, cti, second)

            xk = x_kn[:, i]
            ck = c_kn[:, i]
            xv = x_val[:, i]
            cv = c_val[:, i]
            full = xk & ck
            assign(c_val, c_kn, i + 1, (xv & a) ^ (xv & cv) ^ (a & cv), full)
            ct = cv ^ y0
            f1 = ~full & ck & (a == cv)
            f2 = ~full & ck & (a != cv) & (b == ct)
            assign(c_val, c_kn, i + 1, cv, f1)
            assign(c_val, c_kn, i + 1, ct ^ y1, f2)
            f3 = ~full & xk & (xv == a)
            f4 = ~full & xk & (xv != a) & (xv == b)
            assign(c_val, c_kn, i + 1, xv, f3)
            assign(c_val, c_kn, i + 1, xv ^ y1, f4)

    weights = np.left_shift(np.uint64(1), np.arange(n, dtype=np.uint64))
    solvable = weights[: n - 1]
    x_mask = (x_kn[:, : n - 1] * solvable).sum(axis=1, dtype=np.uint64)
    x_value = ((x_kn[:, : n - 1] & x_val[:, : n - 1]) * solvable).sum(axis=1, dtype=np.uint64)
    c_mask = (c_kn * weights).sum(axis=1, dtype=np.uint64)
    c_value = ((c_kn & c_val) * weights).sum(axis=1, dtype=np.uint64)
    return x_value, x_mask, c_value, c_mask, bad


def brute_force_solutions(alpha: int, beta: int, y: int, n: int) -> set[int]:
    """All residues x mod 2^(n-1) satisfying the kernel equation (oracle)."""
    if n > 16:
        raise ValueError(f"brute force is limited to n <= 16, got {n}")
    limit = 1 << n
    if not (0 <= alpha < limit and 0 <= beta < limit and 0 <= y < limit):
        raise ValueError(f"alpha, beta, y must be {n}-bit words")
    xs = np.arange(limit, dtype=np.uint32)
    mask = np.uint32(limit - 1)
    ys = (((np.uint32(alpha) + xs) & mask) ^ ((np.uint32(beta) + xs) & mask))
    sols = xs[ys == np.uint32(y)] & np.uint32((1 << (n - 1)) - 1)
    return {int(v) for v in np.unique(sols)}
