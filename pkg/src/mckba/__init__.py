"""Workbench for the MCKBA/HCKBA chaotic image cipher and its key-recovery attacks."""

from mckba.block_codec import BlockStream, blocks_to_image, image_to_blocks, read_pgm, write_pgm
from mckba.keystream import LogisticBitGenerator, SecretKey, derive_bits, logistic_iterate, selector_sequence
from mckba.cipher import decrypt_block, decrypt_image, encrypt_block, encrypt_image
from mckba.kernel_solver import (
    InconsistentObservationError,
    PartialKeyObservation,
    brute_force_solutions,
    eval_kernel,
    solve_single_query,
)
from mckba.kpa import EquivalentKey, decrypt_with_equivalent, kpa_attack
from mckba.cpa import build_chosen_images, corollary_queries, cpa_recover, joint_query_solver

__version__ = "0.1.0"
