import numpy as np
import pytest

from mckba.kernel_solver import (
    CARRY_REVEAL,
    DIRECT_X,
    LINKED_PAIR,
    NO_INFO,
    InconsistentObservationError,
    PartialKeyObservation,
    brute_force_solutions,
    classify_case,
    eval_kernel,
    next_row,
    solve_batch,
    solve_single_query,
)

# All 32 rows of the bit-plane transition table: yt[i+1] for
# rows (x, c) in ((0,0),(0,1),(1,0),(1,1)) and columns (a, b, yt) = 0..7.
TRANSITION_TABLE = {
    (0, 0): (0, 0, 0, 1, 0, 0, 0, 1),
    (0, 1): (0, 0, 1, 0, 1, 1, 0, 1),
    (1, 0): (0, 1, 1, 1, 1, 0, 0, 0),
    (1, 1): (0, 1, 0, 0, 0, 1, 0, 0),
}


def test_eval_kernel_examples():
    assert eval_kernel(9, 9, 5, 4) == 0
    assert eval_kernel(0, 0, 13, 4) == 0
    assert eval_kernel(1, 0, 1, 2) == 3
    # cross-check against the brute-force oracle
    assert 1 in brute_force_solutions(1, 0, 3, 2)


def test_next_row_matches_full_table():
    for (x, c), row in TRANSITION_TABLE.items():
        for col in range(8):
            a, b, yt = (col >> 2) & 1, (col >> 1) & 1, col & 1
            ct = c ^ yt
            _, _, yt_next = next_row(x, c, ct, a, b)
            assert yt_next == row[col], (x, c, col)


def test_next_row_spot_examples():
    assert next_row(0, 0, 0 ^ 1, 0, 1)[2] == 1  # (x,c)=(0,0), (a,b,yt)=(0,1,1)
    assert next_row(1, 0, 0 ^ 1, 0, 0)[2] == 1  # (x,c)=(1,0), (a,b,yt)=(0,0,1)
    assert next_row(0, 0, 0, 0, 0) == (0, 0, 0)


def test_next_row_rejects_non_bits():
    with pytest.raises(ValueError):
        next_row(2, 0, 0, 0, 0)


def test_classify_case_full_map():
    expected = {
        (0, 0, 0): NO_INFO,
        (0, 0, 1): DIRECT_X,
        (0, 1, 0): LINKED_PAIR,
        (0, 1, 1): CARRY_REVEAL,
        (1, 0, 0): LINKED_PAIR,
        (1, 0, 1): CARRY_REVEAL,
        (1, 1, 0): NO_INFO,
        (1, 1, 1): DIRECT_X,
    }
    for (a, b, yt), case in expected.items():
        assert classify_case(a, b, yt) == case


def test_solve_no_information_case():
    obs = solve_single_query(0x5A, 0x5A, 0, 8)
    assert obs.mask == 0


def test_solve_two_bit_example():
    # brute force over x in 0..3 leaves only x = 1 (mod 2)
    assert brute_force_solutions(1, 0, 3, 2) == {1}
    obs = solve_single_query(1, 0, 3, 2)
    assert obs.mask == 1 and obs.value == 1


def test_ytilde_lsb_zero_for_real_instances(rng):
    for _ in range(500):
        a, b, x = (int(v) for v in rng.integers(0, 1 << 16, 3))
        y = eval_kernel(a, b, x, 16)
        assert (y ^ a ^ b) & 1 == 0


def test_inconsistent_lsb_raises():
    with pytest.raises(InconsistentObservationError):
        solve_single_query(1, 0, 0, 4)  # yt bit 0 = 1


def test_inconsistent_plane_raises():
    # alpha = beta forces every yt[i+1] to 0; corrupt one high bit of y
    a = b = 0x0F
    y = eval_kernel(a, b, 3, 8) ^ 0x10
    with pytest.raises(InconsistentObservationError):
        solve_single_query(a, b, y, 8)


def test_solver_soundness_exhaustive_n5():
    # every confirmed bit equals the true bit and the shared brute-force bit
    n = 5
    for alpha in range(32):
        for beta in range(32):
            for x in range(32):
                y = eval_kernel(alpha, beta, x, n)
                obs = solve_single_query(alpha, beta, y, n)
                assert obs.value == x & obs.mask, (alpha, beta, x)
                sols = brute_force_solutions(alpha, beta, y, n)
                for i in range(n - 1):
                    if obs.mask >> i & 1:
                        assert len({s >> i & 1 for s in sols}) == 1


def test_brute_force_degenerate_cases():
    assert brute_force_solutions(7, 7, 0, 4) == set(range(8))
    assert brute_force_solutions(7, 7, 1, 4) == set()
    with pytest.raises(ValueError):
        brute_force_solutions(0, 0, 0, 17)


def test_batch_matches_scalar(rng):
    for n in (4, 8, 32):
        count = 2000
        a = rng.integers(0, 1 << n, count, dtype=np.uint64)
        b = rng.integers(0, 1 << n, count, dtype=np.uint64)
        x = rng.integers(0, 1 << n, count, dtype=np.uint64)
        mask = np.uint64((1 << n) - 1)
        y = ((a + x) & mask) ^ ((b + x) & mask)
        value, bits, _, _, bad = solve_batch(a, b, y, n)
        assert not bad.any()
        for k in range(count):
            obs = solve_single_query(int(a[k]), int(b[k]), int(y[k]), n)
            assert (obs.value, obs.mask) == (int(value[k]), int(bits[k]))


def test_batch_flags_inconsistencies():
    a = np.array([1, 0x0F], dtype=np.uint64)
    b = np.array([0, 0x0F], dtype=np.uint64)
    y = np.array([0, eval_kernel(0x0F, 0x0F, 3, 8) ^ 0x10], dtype=np.uint64)
    _, _, _, _, bad = solve_batch(a, b, y, 8)
    assert bad.tolist() == [True, True]


def test_solver_trace_names_cases():
    trace = []
    solve_single_query(1, 0, 3, 2, trace=trace)
    assert any("LINKED_PAIR" in line for line in trace)


def test_observation_invariants():
    with pytest.raises(ValueError):
        PartialKeyObservation(value=0b10, mask=0b01)
    obs = solve_single_query(0xAB, 0xCD, eval_kernel(0xAB, 0xCD, 0x5F, 8), 8)
    assert obs.value & ~obs.mask == 0
    assert obs.mask < 1 << 7  # bit n-1 is never claimed
