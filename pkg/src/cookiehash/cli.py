"""Command-line front end: ``cookiehash <subcommand> ...``.

Exit codes:
    0  success
    2  usage error (bad flags, unreadable input, malformed bits or digests)
    3  computation error (e.g. matrix not in the semigroup, modulus mismatch)
    4  budget exceeded
    5  search exhausted without finding a preimage
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path
from typing import Optional

from . import analysis, attacks, randomness
from .hasher import (
    PRIME_PRESETS,
    CookieHasher,
    Digest,
    HashParams,
    InvalidBitsError,
    ParamsMismatchError,
    bytes_to_bits,
    combine,
    parse_bits,
)
from .matrix import PRESETS, Mat2
from .primes import generate_prime

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_COMPUTE = 3
EXIT_BUDGET = 4
EXIT_NOT_FOUND = 5

NODE_BUDGET_ENV = "COOKIEHASH_NODE_BUDGET"


class UsageError(Exception):
    pass


def _add_prime_args(p: argparse.ArgumentParser, default_preset: Optional[str] = "paper-256") -> None:
    g = p.add_argument_group("modulus (choose one)")
    g.add_argument("--preset", choices=sorted(PRIME_PRESETS), help=f"published prime (default {default_preset})")
    g.add_argument("--prime", type=int, help="decimal prime literal")
    g.add_argument("--prime-bits", type=int, help="with --generate: bit size of a seeded random prime")
    g.add_argument("--generate", action="store_true", help="generate the prime from --seed")
    p.set_defaults(default_preset=default_preset)


def _params(args) -> HashParams:
    sources = [args.preset is not None, args.prime is not None, args.generate]
    if sum(sources) > 1:
        raise UsageError("give exactly one of --preset, --prime, --prime-bits/--generate")
    if args.generate:
        if args.prime_bits is None:
            raise UsageError("--generate needs --prime-bits")
        p = generate_prime(args.prime_bits, args.seed)
        print(f"# prime {p}", file=sys.stderr)
        return HashParams(p, assume_prime=True)
    if args.prime is not None:
        try:
            return HashParams(args.prime)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return HashParams.preset(args.preset or args.default_preset)


def _read_input_bits(args) -> str:
    sources = [args.bits is not None, args.file is not None, args.ascii_file is not None]
    if sum(sources) > 1:
        raise UsageError("give exactly one of --bits, --file, --ascii-file")
    try:
        if args.bits is not None:
            return parse_bits(args.bits)
        if args.file is not None:
            data = sys.stdin.buffer.read() if args.file == "-" else Path(args.file).read_bytes()
            return bytes_to_bits(data)
        if args.ascii_file is not None:
            text = sys.stdin.read() if args.ascii_file == "-" else Path(args.ascii_file).read_text()
            return parse_bits(text)
    except OSError as exc:
        raise UsageError(f"cannot read input: {exc}") from None
    except InvalidBitsError as exc:
        raise UsageError(str(exc)) from None
    return bytes_to_bits(sys.stdin.buffer.read())


def _format_digest(d: Digest, fmt: str) -> str:
    return d.to_bits() if fmt == "bits" else d.hex()


def cmd_hash(args) -> int:
    params = _params(args)
    bits = _read_input_bits(args)
    h = CookieHasher(params).absorb_bits(bits)
    if args.raw:
        digest = h.finalize_raw()
        counters = h.counters
    else:
        padded = h.copy().absorb_bits("000")
        digest, counters = padded.finalize_raw(), padded.counters
    print(_format_digest(digest, args.format))
    if args.count_ops:
        print(f"additions={counters.additions} multiplications={counters.multiplications}")
    return EXIT_OK


def cmd_combine(args) -> int:
    params = _params(args)
    try:
        d1 = Digest.from_hex(args.digest1, params.p)
        d2 = Digest.from_hex(args.digest2, params.p)
    except (ParamsMismatchError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    print(_format_digest(combine(d1, d2), args.format))
    return EXIT_OK


def cmd_growth(args) -> int:
    if args.mode == "random":
        lengths = args.length or [1000]
        report = analysis.random_growth(args.generators, lengths, args.trials, args.seed)
    else:
        report = analysis.exhaustive_growth_report(args.generators, args.max_len, override=args.override)
    print(report.to_csv() if args.format == "csv" else report.summary(), end="" if args.format == "csv" else "\n")
    return EXIT_OK


def cmd_freeness(args) -> int:
    result = analysis.freeness_check(args.generators, args.max_len, override=args.override)
    print(result.summary())
    return EXIT_OK if result.free else EXIT_COMPUTE


def cmd_girth_bound(args) -> int:
    if (args.prime is None) == (args.prime_bits is None):
        raise UsageError("give exactly one of --prime or --prime-bits")
    if args.prime is not None:
        bound = analysis.collision_bound(p=args.prime, rate=args.rate)
    else:
        bound = analysis.collision_bound(p_bits=args.prime_bits, rate=args.rate)
    print(bound)
    return EXIT_OK


def _parse_matrix(text: str) -> Mat2:
    try:
        a, b, c, d = (int(x) for x in text.replace(",", " ").split())
    except ValueError:
        raise UsageError("--matrix expects four integers a,b,c,d (row-major)") from None
    return Mat2(a, b, c, d)


def cmd_preimage(args) -> int:
    budget = int(os.environ.get(NODE_BUDGET_ENV, args.budget))
    if args.method == "greedy":
        try:
            word = attacks.greedy_preimage_2gen(_parse_matrix(args.matrix))
        except attacks.NotInSemigroupError as exc:
            print(f"not in semigroup: {exc}", file=sys.stderr)
            return EXIT_NOT_FOUND
        print(word)
        return EXIT_OK
    if args.method == "backtrack":
        word, stats = attacks.backtrack_preimage_3gen(_parse_matrix(args.matrix), args.max_len, budget)
        print(word if word is not None else "exhausted")
        print(stats.summary(), file=sys.stderr)
        return EXIT_OK if word is not None else EXIT_NOT_FOUND
    params = _params(args)
    try:
        digest = Digest.from_hex(args.digest, params.p)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if 2 ** (args.max_len + 1) > budget and not args.override:
        raise analysis.BudgetExceededError(f"2^{args.max_len} candidates exceed node budget {budget}")
    word = attacks.brute_force_preimage(digest, args.max_len, params, padded=args.padded)
    if word is None:
        print("exhausted")
        return EXIT_NOT_FOUND
    print(word if word else "(empty)")
    return EXIT_OK


def cmd_nist_export(args) -> int:
    params = _params(args)
    sequences = randomness.iter_hash_sequences(params, args.count, args.input_bits, args.seed, args.target_bits)
    paths = randomness.sts_export(sequences, args.out)
    print(f"wrote {len(paths)} files to {args.out}")
    return EXIT_OK


def cmd_randtest(args) -> int:
    if args.input:
        sequences = [randomness.read_sts_file(p) for p in args.input]
    else:
        params = _params(args)
        sequences = randomness.iter_hash_sequences(params, args.count, args.input_bits, args.seed, args.target_bits)
    print(randomness.CSV_HEADER)
    passes: dict[str, list[int]] = {}
    for seq in sequences:
        for rep in randomness.run_suite(seq, args.block_size):
            print(rep.csv_line())
            key = f"{rep.name}:{rep.params}" if rep.name == "cumulative_sums" else rep.name
            tally = passes.setdefault(key, [0, 0])
            tally[0] += rep.passed
            tally[1] += 1
    for key, (ok, total) in passes.items():
        print(f"# {key} pass rate {ok}/{total}", file=sys.stderr)
    return EXIT_OK


def cmd_bench(args) -> int:
    params = _params(args)
    bits = randomness.random_input_bits(args.seed, 0, 0, args.bits_len)
    h = CookieHasher(params)
    t0 = time.perf_counter()
    h.absorb_bits(bits)
    elapsed = time.perf_counter() - t0
    n = len(bits)
    c = h.counters
    print(f"bits={n} additions={c.additions} multiplications={c.multiplications} "
          f"additions_per_bit={c.additions / n:.4f} bound={5 * (n - 1)}")
    print(f"throughput={n / elapsed:.0f} bits/s", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cookiehash", description="Cayley hashing with cookies")
    sub = parser.add_subparsers(dest="command", required=True)

    def input_args(p):
        p.add_argument("--bits", help="inline bit string ('0'/'1', whitespace ignored)")
        p.add_argument("--file", help="raw byte file, bits MSB-first ('-' for stdin)")
        p.add_argument("--ascii-file", help="file of '0'/'1' characters ('-' for stdin)")

    def seed_arg(p, default=0):
        p.add_argument("--seed", type=int, default=default)

    p = sub.add_parser("hash", help="hash bits or bytes")
    _add_prime_args(p)
    input_args(p)
    seed_arg(p)
    p.add_argument("--raw", action="store_true", help="skip the 000 padding")
    p.add_argument("--count-ops", action="store_true", help="print addition/multiplication counters")
    p.add_argument("--format", choices=("hex", "bits"), default="hex")
    p.set_defaults(func=cmd_hash)

    p = sub.add_parser("combine", help="multiply two hex digests")
    _add_prime_args(p)
    seed_arg(p)
    p.add_argument("digest1")
    p.add_argument("digest2")
    p.add_argument("--format", choices=("hex", "bits"), default="hex")
    p.set_defaults(func=cmd_combine)

    p = sub.add_parser("growth", help="entry-growth experiments")
    p.add_argument("--generators", choices=sorted(PRESETS), default="a2b2")
    p.add_argument("--mode", choices=("random", "exhaustive"), default="random")
    p.add_argument("--length", type=int, action="append", help="word length (repeatable, random mode)")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--max-len", type=int, default=12, help="exhaustive mode: longest word length")
    p.add_argument("--format", choices=("csv", "summary"), default="csv")
    p.add_argument("--override", action="store_true", help="lift the enumeration budget")
    seed_arg(p)
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser("freeness", help="exhaustive collision search among short words")
    p.add_argument("--generators", choices=sorted(PRESETS), default="cookie")
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--override", action="store_true")
    p.set_defaults(func=cmd_freeness)

    p = sub.add_parser("girth-bound", help="collision-free length for a modulus")
    p.add_argument("--prime", type=int)
    p.add_argument("--prime-bits", type=int)
    p.add_argument("--rate", type=float, help="per-letter growth rate (default (3+sqrt5)/2)")
    p.set_defaults(func=cmd_girth_bound)

    p = sub.add_parser("preimage", help="preimage searches")
    p.add_argument("--method", choices=("greedy", "backtrack", "brute"), required=True)
    p.add_argument("--matrix", help="integer matrix a,b,c,d for greedy/backtrack")
    p.add_argument("--digest", help="hex digest for brute force")
    p.add_argument("--max-len", type=int, default=16)
    p.add_argument("--padded", action="store_true", help="brute force: target is a padded digest")
    p.add_argument("--budget", type=int, default=attacks.DEFAULT_NODE_BUDGET * 20)
    p.add_argument("--override", action="store_true")
    _add_prime_args(p)
    seed_arg(p)
    p.set_defaults(func=cmd_preimage)

    p = sub.add_parser("nist-export", help="write hash-output sequences for the external NIST suite")
    _add_prime_args(p)
    seed_arg(p)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--input-bits", type=int, default=1024)
    p.add_argument("--target-bits", type=int, default=10**6)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_nist_export)

    p = sub.add_parser("randtest", help="run the built-in statistical tests")
    _add_prime_args(p)
    seed_arg(p)
    p.add_argument("--input", nargs="*", help="ASCII sequence files; omit to generate hash output")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--input-bits", type=int, default=1024)
    p.add_argument("--target-bits", type=int, default=10**6)
    p.add_argument("--block-size", type=int, default=128)
    p.set_defaults(func=cmd_randtest)

    p = sub.add_parser("bench", help="operation counts and throughput on a seeded input")
    _add_prime_args(p)
    seed_arg(p)
    p.add_argument("--bits-len", type=int, default=10**6)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.command == "preimage":
        needs = {"greedy": "matrix", "backtrack": "matrix", "brute": "digest"}[args.method]
        if getattr(args, needs) is None:
            print(f"error: --{needs} is required for --method {args.method}", file=sys.stderr)
            return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (analysis.BudgetExceededError, attacks.SearchBudgetExceeded) as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ParamsMismatchError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
