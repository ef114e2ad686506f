"""Command-line entry point: ``nucache <command> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import converse, delivery, optimizer, oracle, placement, rates, scheme
from .field import default_prime

SCHEMA_VERSION = 1
EXIT_OK, EXIT_VERIFY, EXIT_USAGE = 0, 1, 2


class ConfigError(Exception):
    pass


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _fracs(text: str) -> list[Fraction]:
    try:
        return [rates.as_fraction(x) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _frac(text: str) -> Fraction:
    (x,) = _fracs(text)
    return x


def _num(x: Fraction) -> dict:
    return {"exact": str(x), "float": float(x)}


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None


def _emit(obj, out: Optional[str]) -> None:
    text = json.dumps(obj, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _digest(arr: np.ndarray) -> str:
    return hashlib.sha256(np.asarray(arr, dtype="<u4").tobytes()).hexdigest()


def _prime(args) -> int:
    return args.prime if args.prime is not None else default_prime()


# place / deliver / decode


def cmd_place(args) -> int:
    p = _prime(args)
    if args.t is not None:
        if args.files != 2 or len(args.t) != 2:
            raise ConfigError("fractional allocations need exactly two files")
        plan = scheme.share_plan(args.users, *args.t)
        F = scheme.minimal_file_length(plan, args.subfile_len)
        files = placement.random_symbols(2, F, p, args.seed)
        maps = scheme.joint_place(plan, files, p)
        obj = {
            "schema_version": SCHEMA_VERSION,
            "joint": True,
            "K": args.users,
            "t": [str(x) for x in args.t],
            "F": F,
            "p": p,
            "seed": args.seed,
            "plan": plan.to_json(),
            "segments": [m.to_json() for m in maps],
        }
    else:
        if args.r is None or len(args.r) != args.files:
            raise ConfigError(f"--r needs {args.files} values")
        cfg = placement.PlacementConfig(args.users, tuple(args.r), args.subfile_len, p)
        obj = placement.place(cfg, None, seed=args.seed).to_json()
    _emit(obj, args.out)
    return EXIT_OK


def _single_files(cmap: placement.CacheMap) -> np.ndarray:
    if cmap.seed is None:
        raise ConfigError("cache map carries no seed; payloads cannot be regenerated")
    return placement.random_files(cmap.cfg, cmap.seed)


def _joint_setup(obj: dict):
    plan = scheme.share_plan(int(obj["K"]), *(rates.as_fraction(x) for x in obj["t"]))
    files = placement.random_symbols(2, int(obj["F"]), int(obj["p"]), int(obj["seed"]))
    return plan, files


def cmd_deliver(args) -> int:
    obj = _read_json(args.map)
    if obj.get("joint"):
        plan, files = _joint_setup(obj)
        demand = delivery.check_demand(args.demand, plan.K)
        msgs = scheme.joint_deliver(demand, plan, files, int(obj["p"]))
        _emit(scheme.joint_to_json(msgs), args.out)
        rate = scheme.realized_rate(msgs, int(obj["F"]))
    else:
        cmap = placement.CacheMap.from_json(obj)
        if cmap.cfg.N != 2:
            raise ConfigError("delivery is defined for two files only")
        demand = delivery.check_demand(args.demand, cmap.K)
        msg = delivery.encode_delivery(demand, _single_files(cmap), cmap.cfg)
        _emit(msg.to_json(), args.out)
        rate = Fraction(msg.n_rows, cmap.cfg.S)
    print(f"rate {rate} ({float(rate):.6f})", file=sys.stderr)
    return EXIT_OK


def cmd_decode(args) -> int:
    obj = _read_json(args.map)
    raw = _read_json(args.msg)
    if obj.get("joint"):
        if not isinstance(raw, list):
            raise ConfigError("joint cache map needs a joint message array")
        plan, files = _joint_setup(obj)
        msgs = scheme.joint_from_json(raw)
        maps = scheme.joint_place(plan, files, int(obj["p"]))
        if len(maps) != len(msgs):
            raise ConfigError("message segments do not match the cache map")
        for m, cm in zip(msgs, maps):
            _same_config(m, cm.cfg)
        user = _check_user(args.user, plan.K)
        got = scheme.joint_decode(user, [cm.user(user) for cm in maps], msgs)
        demand = msgs[0].demand
    else:
        if isinstance(raw, list):
            raise ConfigError("single cache map cannot decode a joint message array")
        cmap = placement.CacheMap.from_json(obj)
        msg = delivery.DeliveryMessage.from_json(raw)
        _same_config(msg, cmap.cfg)
        files = _single_files(cmap)
        placement.attach_payloads(cmap, files)
        user = _check_user(args.user, cmap.K)
        got = delivery.decode(user, cmap.user(user), msg)
        demand = msg.demand
    want = demand[user - 1]
    ok = bool(np.array_equal(got, files[want - 1]))
    _emit(
        {"user": user, "file": want, "length": int(got.size), "sha256": _digest(got), "verified": ok},
        None,
    )
    return EXIT_OK if ok else EXIT_VERIFY


def _check_user(u: int, K: int) -> int:
    if not 1 <= u <= K:
        raise ConfigError(f"user {u} outside 1..{K}")
    return u


def _same_config(msg: delivery.DeliveryMessage, cfg: placement.PlacementConfig) -> None:
    if (msg.K, tuple(msg.r), msg.L, msg.p) != (cfg.K, cfg.r, cfg.L, cfg.p):
        raise ConfigError(
            f"message built for K={msg.K}, r={tuple(msg.r)}, L={msg.L}, p={msg.p}; "
            f"cache map has K={cfg.K}, r={cfg.r}, L={cfg.L}, p={cfg.p}"
        )


# rate calculus


def rate_table(K: int) -> list[list]:
    rows = []
    for r1 in range(K + 1):
        for r2 in range(r1 + 1):
            vals = [delivery.delivery_rate(K, r1, r2, req) for req in ({1, 2}, {1}, {2})]
            rows.append([r1, r2, *map(str, vals), *(f"{float(v):.12g}" for v in vals)])
    return rows


RATE_HEADER = ["r1", "r2", "R12", "R1", "R2", "R12_float", "R1_float", "R2_float"]


def _write_csv(header: Sequence[str], rows: Sequence[Sequence], out: Optional[str]) -> None:
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if out:
            fh.close()


def cmd_rate_table(args) -> int:
    _write_csv(RATE_HEADER, rate_table(args.users), args.out)
    return EXIT_OK


def optimal_report(K: int, p1: Fraction, M: Fraction) -> dict:
    alloc = optimizer.optimal_allocation(K, p1, M)
    return {
        "schema_version": SCHEMA_VERSION,
        "K": K,
        "p1": str(p1),
        "M": str(M),
        "t1": str(alloc.t1),
        "t2": str(alloc.t2),
        "rate": _num(alloc.rate),
        "R_un": _num(optimizer.baseline_uniform(K, p1, M)),
        "R_nc": _num(optimizer.baseline_grouping(K, p1, M)),
        "swapped": alloc.swapped,
    }


def cmd_optimal(args) -> int:
    _emit(optimal_report(args.users, args.p1, args.memory), args.out)
    return EXIT_OK


def cmd_converse(args) -> int:
    res = converse.converse_bound(args.users, args.files, args.p, args.memory)
    obj = {"schema_version": SCHEMA_VERSION, "K": args.users, "N": args.files, "M": str(args.memory)}
    obj.update(res.to_json())
    _emit(obj, args.out)
    return EXIT_OK if res.certified else EXIT_VERIFY


def cmd_regions(args) -> int:
    found = optimizer.region_boundaries(args.users, args.memory)
    _emit(
        {
            "schema_version": SCHEMA_VERSION,
            "K": args.users,
            "M": str(args.memory),
            "boundaries": [
                {
                    "p1": b.p1,
                    "gap": b.gap,
                    "below": [str(x) for x in b.below],
                    "above": [str(x) for x in b.above],
                }
                for b in found
            ],
        },
        args.out,
    )
    return EXIT_OK


def _grid(lo: Fraction, hi: Fraction, points: int) -> list[Fraction]:
    if points < 2:
        return [lo]
    return [lo + (hi - lo) * k / (points - 1) for k in range(points)]


def cmd_sweep(args) -> int:
    K = args.users
    if args.mode == "prob":
        M = args.memory
        header = ["p1", "gap", "t1", "t2", "rate", "rate_float", "R_un", "R_un_float", "R_nc", "R_nc_float"]
        rows = []
        for p1 in _grid(Fraction(1, 2), Fraction(99, 100), args.points):
            a = optimizer.optimal_allocation(K, p1, M)
            un, nc = optimizer.baseline_uniform(K, p1, M), optimizer.baseline_grouping(K, p1, M)
            rows.append(
                [str(p1), str(2 * p1 - 1), str(a.t1), str(a.t2)]
                + [c for v in (a.rate, un, nc) for c in (str(v), f"{float(v):.12g}")]
            )
    elif args.mode == "memory":
        p1 = args.p1
        header = ["M", "t1", "t2", "rate", "rate_float", "R_un", "R_un_float", "R_nc", "R_nc_float"]
        rows = []
        for M in _grid(Fraction(0), Fraction(2), args.points):
            a = optimizer.optimal_allocation(K, p1, M)
            un, nc = optimizer.baseline_uniform(K, p1, M), optimizer.baseline_grouping(K, p1, M)
            rows.append(
                [str(M), str(a.t1), str(a.t2)]
                + [c for v in (a.rate, un, nc) for c in (str(v), f"{float(v):.12g}")]
            )
    else:
        p1 = args.p1
        header = ["r1", "r2", "M", "rbar", "rbar_float"]
        rows = []
        for r1 in range(K + 1):
            for r2 in range(r1 + 1):
                v = rates.expected_rate(K, p1, r1, r2)
                rows.append([r1, r2, str(Fraction(r1 + r2, K)), str(v), f"{float(v):.12g}"])
    _write_csv(header, rows, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    p = _prime(args)
    if args.what == "decode":
        rep = oracle.exhaustive_decode(args.max_users, seeds=args.seeds, p=p)
    else:
        rep = oracle.entropy_sweep(args.max_users, p=p)
    rep["schema_version"] = SCHEMA_VERSION
    _emit(rep, args.out)
    return EXIT_OK if rep["ok"] else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nucache", description="Coded caching with non-uniform demands.")
    ap.add_argument("--prime", type=int, default=None, help="field prime (default: $NUCACHE_FIELD_PRIME or 65537)")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("place", help="build a cache map")
    s.add_argument("--users", type=int, required=True)
    s.add_argument("--files", type=int, default=2)
    s.add_argument("--r", type=_ints)
    s.add_argument("--t", type=_fracs, help="fractional allocation t1,t2 (memory sharing)")
    s.add_argument("--subfile-len", type=int, default=4)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_place)

    s = sub.add_parser("deliver", help="encode the broadcast for a demand")
    s.add_argument("--map", required=True)
    s.add_argument("--demand", type=_ints, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_deliver)

    s = sub.add_parser("decode", help="decode one user's file")
    s.add_argument("--map", required=True)
    s.add_argument("--msg", required=True)
    s.add_argument("--user", type=int, required=True)
    s.set_defaults(func=cmd_decode)

    s = sub.add_parser("rate-table", help="delivery rates for every integer profile")
    s.add_argument("--users", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_rate_table)

    s = sub.add_parser("optimal", help="optimal two-file allocation and baselines")
    s.add_argument("--users", type=int, required=True)
    s.add_argument("--p1", type=_frac, required=True)
    s.add_argument("--memory", type=_frac, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_optimal)

    s = sub.add_parser("converse", help="lower bound for uncoded placement")
    s.add_argument("--users", type=int, required=True)
    s.add_argument("--files", type=int, required=True)
    s.add_argument("--p", type=_fracs, required=True)
    s.add_argument("--memory", type=_frac, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_converse)

    s = sub.add_parser("regions", help="p1 values where the optimal allocation changes")
    s.add_argument("--users", type=int, required=True)
    s.add_argument("--memory", type=_frac, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_regions)

    s = sub.add_parser("sweep", help="plot-ready CSV")
    s.add_argument("--mode", choices=["prob", "memory", "surface"], required=True)
    s.add_argument("--users", type=int, required=True)
    s.add_argument("--p1", type=_frac, default=Fraction(4, 5))
    s.add_argument("--memory", type=_frac, default=Fraction(1))
    s.add_argument("--points", type=int, default=50)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("verify", help="brute-force decode or entropy sweeps")
    s.add_argument("what", choices=["decode", "entropy"])
    s.add_argument("--max-users", type=int, default=4)
    s.add_argument("--seeds", type=_ints, default=[0, 1, 2])
    s.add_argument("--out")
    s.set_defaults(func=cmd_verify)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ArithmeticError as exc:
        # singular or inconsistent decoding systems
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (ConfigError, ValueError, KeyError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
