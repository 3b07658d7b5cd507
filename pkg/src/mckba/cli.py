"""Command-line front end: cipher, solver, attacks and probability reports.

Subcommands: keygen, encrypt, decrypt, kernel-solve, kpa, cpa-gen,
cpa-recover, analyze.  Images are binary PGM (P5); reports are JSON except
for `analyze`, which writes a delimited table and, alongside it, a rendered
figure.  Set MCKBA_VERBOSE=1 for progress chatter on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from mckba.block_codec import read_pgm, write_pgm
from mckba.cipher import decrypt_image, encrypt_image
from mckba.cpa import PAIR_A, build_chosen_images, cpa_recover
from mckba.kernel_solver import solve_single_query
from mckba.keystream import SecretKey, parse_x0, required_key_distance
from mckba.kpa import decrypt_with_equivalent, kpa_attack
from mckba.prob_analysis import empirical_profile


def keygen(n: int, seed: int | None = None) -> SecretKey:
    """Draw a key: uniform key1, key2 at the required Hamming distance, x0 in (0,1)."""
    if not 2 <= n <= 64:
        raise ValueError(f"word size must be in [2, 64], got {n}")
    rng = random.Random(seed)
    key1 = rng.getrandbits(n)
    flips = rng.sample(range(n), required_key_distance(n))
    key2 = key1
    for j in flips:
        key2 ^= 1 << j
    x0 = rng.random()
    while x0 == 0.0:
        x0 = rng.random()
    return SecretKey(key1=key1, key2=key2, x0=x0, n=n)


@dataclass
class AttackReport:
    """Structured result of a key-recovery run, serialised as JSON."""

    command: str
    n: int
    width: int
    height: int
    key1_star: str
    key2_star: str
    key1_mask: str
    key2_mask: str
    block_stats: dict
    ambiguous_indices: list[int]
    parity_histogram: dict
    timing_s: float
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "AttackReport":
        return cls(**json.loads(text))


def _verbose() -> bool:
    return os.environ.get("MCKBA_VERBOSE", "") not in ("", "0")


def _note(msg: str) -> None:
    if _verbose():
        print(msg, file=sys.stderr)


def _key_from_args(args) -> SecretKey:
    return SecretKey(key1=args.key1, key2=args.key2, x0=parse_x0(args.x0), n=args.n)


def _word(text: str) -> int:
    return int(text, 0)


def _build_attack_report(command, ek, target_shape, elapsed, seed=None, extra=None) -> AttackReport:
    height, width = target_shape
    selectors = ek.selectors
    parity_even = ek.parity_even
    return AttackReport(
        command=command,
        n=ek.n,
        width=width,
        height=height,
        key1_star=f"{ek.key1_star:#x}",
        key2_star=f"{ek.key2_star:#x}",
        key1_mask=f"{ek.key1_mask:#x}",
        key2_mask=f"{ek.key2_mask:#x}",
        block_stats={
            "total": int(len(selectors)),
            "selector_counts": {str(b): int(np.sum(selectors == b)) for b in range(4)},
            "key1_class": int(np.sum(selectors >= 2)),
            "key2_class": int(np.sum((selectors == 0) | (selectors == 1))),
            "ambiguous": len(ek.ambiguous_indices),
            "seed_merge": ek.merge_stats or {},
        },
        ambiguous_indices=ek.ambiguous_indices,
        parity_histogram={
            "even (B in {1,3})": int(np.sum(parity_even)),
            "odd (B in {0,2})": int(np.sum(~parity_even)),
        },
        timing_s=round(elapsed, 3),
        seed=seed,
        extra=extra or {},
    )


def _render_attack_figure(cipher_img, decrypted_img, path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, 2, figsize=(8, 4))
    for ax, img, title in zip(axes, (cipher_img, decrypted_img), ("cipher image", "decrypted")):
        ax.imshow(img, cmap="gray", vmin=0, vmax=255, interpolation="nearest")
        ax.set_title(title)
        ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _render_profile_figure(profile, path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    idx = np.arange(profile.n - 1)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(idx, profile.x_closed[:-1], "o-", label="x[i] model")
    ax1.plot(idx, profile.x_empirical[:-1], "s--", label="x[i] measured")
    ax1.plot(np.arange(profile.n), profile.carry_closed, "^-", label="c[i] model")
    ax1.plot(np.arange(profile.n), profile.carry_empirical, "v--", label="c[i] measured")
    ax1.set_xlabel("bit index")
    ax1.set_ylabel("confirmation probability")
    ax1.set_ylim(0, 1.05)
    ax1.legend(fontsize=8)
    ax1.set_title("per-bit confirmation")
    ax2.plot(np.arange(profile.n), profile.y_zero_closed, "o-", label="closed form")
    ax2.plot(np.arange(profile.n), profile.y_zero_empirical, "s--", label="measured")
    ax2.set_xlabel("bit index")
    ax2.set_ylabel("Prob(yt[i] = 0)")
    ax2.legend(fontsize=8)
    ax2.set_title("masked-output zero rate")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _cmd_keygen(args) -> int:
    key = keygen(args.n, args.seed)
    payload = {
        "n": key.n,
        "key1": f"{key.key1:#x}",
        "key2": f"{key.key2:#x}",
        "x0": repr(key.x0),
        "hamming_distance": key.hamming_distance,
    }
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _cmd_encrypt(args) -> int:
    key = _key_from_args(args)
    image = read_pgm(args.infile)
    write_pgm(args.outfile, encrypt_image(image, key))
    _note(f"encrypted {args.infile} -> {args.outfile}")
    return 0


def _cmd_decrypt(args) -> int:
    key = _key_from_args(args)
    image = read_pgm(args.infile)
    write_pgm(args.outfile, decrypt_image(image, key))
    _note(f"decrypted {args.infile} -> {args.outfile}")
    return 0


def _cmd_kernel_solve(args) -> int:
    trace: list[str] = []
    obs = solve_single_query(args.alpha, args.beta, args.y, args.n, trace=trace)
    print(f"value = {obs.value:#x}")
    print(f"mask  = {obs.mask:#x}  ({obs.confirmed_count} of {args.n - 1} solvable bits)")
    for line in trace:
        print(line)
    return 0


def _cmd_kpa(args) -> int:
    start = time.perf_counter()
    p1, c1 = read_pgm(args.p1), read_pgm(args.c1)
    p2, c2 = read_pgm(args.p2), read_pgm(args.c2)
    ek = kpa_attack(p1, c1, p2, c2, args.n)
    target = read_pgm(args.target)
    decrypted, dec_report = decrypt_with_equivalent(target, ek)
    write_pgm(args.outfile, decrypted)
    elapsed = time.perf_counter() - start
    report = _build_attack_report("kpa", ek, target.shape, elapsed, extra={"decryption": dec_report})
    with open(args.report, "w") as fh:
        fh.write(report.to_json() + "\n")
    if args.fig:
        _render_attack_figure(target, decrypted, args.fig)
    _note(f"kpa: {dec_report['ambiguous_count']} ambiguous of {dec_report['total_blocks']} blocks")
    return 0


def _cmd_cpa_gen(args) -> int:
    p1, p2, tags = build_chosen_images(args.width, args.height, args.n, args.seed)
    write_pgm(args.out1, p1)
    write_pgm(args.out2, p2)
    with open(args.tags, "w") as fh:
        json.dump({"n": args.n, "seed": args.seed, "tags": [int(t) for t in tags]}, fh)
        fh.write("\n")
    _note(f"chosen images written; {int(np.sum(tags == PAIR_A))} of {len(tags)} blocks carry pair A")
    return 0


def _cmd_cpa_recover(args) -> int:
    start = time.perf_counter()
    with open(args.tags) as fh:
        tag_record = json.load(fh)
    if tag_record.get("n") != args.n:
        raise ValueError(f"tag record was generated for n={tag_record.get('n')}, not n={args.n}")
    tags = np.array(tag_record["tags"], dtype=np.int8)
    p1, c1 = read_pgm(args.p1), read_pgm(args.c1)
    p2, c2 = read_pgm(args.p2), read_pgm(args.c2)
    ek = cpa_recover(p1, c1, p2, c2, tags, args.n)
    target = read_pgm(args.target)
    decrypted, dec_report = decrypt_with_equivalent(target, ek)
    write_pgm(args.outfile, decrypted)
    elapsed = time.perf_counter() - start
    report = _build_attack_report(
        "cpa-recover", ek, target.shape, elapsed, seed=tag_record.get("seed"),
        extra={"decryption": dec_report},
    )
    with open(args.report, "w") as fh:
        fh.write(report.to_json() + "\n")
    if args.fig:
        _render_attack_figure(target, decrypted, args.fig)
    return 0


def _cmd_analyze(args) -> int:
    start = time.perf_counter()
    profile = empirical_profile(args.n, args.trials, args.seed)
    rows = list(profile.rows())
    columns = list(rows[0].keys())
    with open(args.report, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_format_cell(row[c]) for c in columns) + "\n")
    if not args.no_fig:
        fig_path = os.path.splitext(args.report)[0] + ".png"
        _render_profile_figure(profile, fig_path)
        _note(f"figure written to {fig_path}")
    _note(
        f"analyze: n={profile.n} {'exhaustive' if profile.exact else f'{profile.trials} trials'}"
        f" in {time.perf_counter() - start:.1f}s"
    )
    return 0


def _format_cell(value) -> str:
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.6f}"
    return str(value)


def _add_key_flags(parser) -> None:
    parser.add_argument("--n", type=int, required=True, help="word size in bits")
    parser.add_argument("--key1", type=_word, required=True, help="first subkey (int or 0x hex)")
    parser.add_argument("--key2", type=_word, required=True, help="second subkey (int or 0x hex)")
    parser.add_argument("--x0", required=True, help="initial condition: decimal or numerator/2^k")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mckba", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate a key satisfying the distance constraint")
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_keygen)

    for name, handler in (("encrypt", _cmd_encrypt), ("decrypt", _cmd_decrypt)):
        p = sub.add_parser(name, help=f"{name} a PGM image")
        _add_key_flags(p)
        p.add_argument("--in", dest="infile", required=True, help="input PGM")
        p.add_argument("--out", dest="outfile", required=True, help="output PGM")
        p.set_defaults(func=handler)

    p = sub.add_parser("kernel-solve", help="solve one kernel equation and show the rule trace")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=_word, required=True)
    p.add_argument("--beta", type=_word, required=True)
    p.add_argument("--y", type=_word, required=True)
    p.set_defaults(func=_cmd_kernel_solve)

    p = sub.add_parser("kpa", help="known-plaintext attack from two image pairs")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p1", required=True)
    p.add_argument("--c1", required=True)
    p.add_argument("--p2", required=True)
    p.add_argument("--c2", required=True)
    p.add_argument("--target", required=True, help="cipher image to decrypt with the recovered key")
    p.add_argument("--out", dest="outfile", required=True, help="decrypted PGM")
    p.add_argument("--report", required=True, help="JSON report path")
    p.add_argument("--fig", default=None, help="optional side-by-side figure (PNG)")
    p.set_defaults(func=_cmd_kpa)

    p = sub.add_parser("cpa-gen", help="build the two chosen plain-images")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out1", required=True)
    p.add_argument("--out2", required=True)
    p.add_argument("--tags", required=True, help="where to persist the per-block tag record (JSON)")
    p.set_defaults(func=_cmd_cpa_gen)

    p = sub.add_parser("cpa-recover", help="recover the key from the chosen-image responses")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p1", required=True)
    p.add_argument("--c1", required=True)
    p.add_argument("--p2", required=True)
    p.add_argument("--c2", required=True)
    p.add_argument("--tags", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--fig", default=None)
    p.set_defaults(func=_cmd_cpa_recover)

    p = sub.add_parser("analyze", help="closed-form vs measured confirmation probabilities")
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", required=True, help="CSV table path (figure lands alongside)")
    p.add_argument("--no-fig", action="store_true", help="skip the rendered figure")
    p.set_defaults(func=_cmd_analyze)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"mckba {args.command}: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
