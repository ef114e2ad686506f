"""Uncoded cache placement with equal subpacketization for every file.

Each file is cut into ``S`` equal subfiles, one per nested chain.  User ``k``
stores subfile ``(i, chain)`` of file ``i`` exactly when ``k`` belongs to
level ``i`` of the chain, so file ``i`` receives ``r_i / K`` of every cache.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .combinatorics import (
    ChainIndex,
    chain_count,
    chain_positions,
    check_profile,
    enumerate_chains,
)
from .field import DEFAULT_PRIME, check_prime

SCHEMA_VERSION = 1

Entry = tuple[int, ChainIndex]


@dataclass(frozen=True)
class PlacementConfig:
    K: int
    r: tuple[int, ...]
    L: int = 16
    p: int = DEFAULT_PRIME

    def __post_init__(self):
        object.__setattr__(self, "r", check_profile(self.K, self.r))
        if self.L < 1:
            raise ValueError(f"subfile length must be positive, got {self.L}")
        check_prime(self.p)

    @property
    def N(self) -> int:
        return len(self.r)

    @property
    def S(self) -> int:
        return chain_count(self.K, self.r)

    @property
    def F(self) -> int:
        return self.S * self.L

    @property
    def memory(self) -> Fraction:
        return Fraction(sum(self.r), self.K)


@dataclass
class UserCache:
    user: int
    entries: list[Entry]
    payloads: Optional[dict[Entry, np.ndarray]] = None

    def knows(self, file: int, chain: ChainIndex) -> bool:
        return (file, chain) in self._index

    def get(self, file: int, chain: ChainIndex) -> np.ndarray:
        if self.payloads is None:
            raise LookupError(f"user {self.user} cache holds no payloads")
        return self.payloads[(file, chain)]

    @cached_property
    def _index(self) -> frozenset[Entry]:
        return frozenset(self.entries)

    def symbol_count(self, L: int) -> int:
        return len(self.entries) * L


@dataclass
class CacheMap:
    cfg: PlacementConfig
    users: list[UserCache]
    perms: Optional[list[tuple[int, ...]]] = None
    seed: Optional[int] = None
    meta: dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return self.cfg.K

    def user(self, k: int) -> UserCache:
        return self.users[k - 1]

    def to_json(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "K": self.cfg.K,
            "r": list(self.cfg.r),
            "L": self.cfg.L,
            "p": self.cfg.p,
            "users": [
                {
                    "id": u.user,
                    "entries": [
                        {"file": f, "chain": [list(level) for level in chain]}
                        for f, chain in u.entries
                    ],
                }
                for u in self.users
            ],
        }
        if self.seed is not None:
            out["seed"] = self.seed
        if self.perms is not None:
            out["perms"] = [list(pm) for pm in self.perms]
        if self.meta:
            out["meta"] = self.meta
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "CacheMap":
        if obj.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
            raise ValueError(f"unsupported cache map schema {obj.get('schema_version')}")
        cfg = PlacementConfig(
            int(obj["K"]), tuple(obj["r"]), int(obj.get("L", 16)), int(obj.get("p", DEFAULT_PRIME))
        )
        users = []
        for u in obj["users"]:
            entries = [
                (int(e["file"]), tuple(tuple(int(x) for x in lvl) for lvl in e["chain"]))
                for e in u["entries"]
            ]
            users.append(UserCache(int(u["id"]), entries))
        perms = obj.get("perms")
        return cls(
            cfg,
            users,
            perms=[tuple(pm) for pm in perms] if perms is not None else None,
            seed=obj.get("seed"),
            meta=obj.get("meta", {}),
        )


def subpacketization(K: int, r: Sequence[int]) -> int:
    return chain_count(K, r)


def random_symbols(N: int, length: int, p: int, seed: int) -> np.ndarray:
    """``N x length`` array of uniform field symbols, reproducible from ``seed``."""
    rng = np.random.default_rng(seed)
    return rng.integers(0, p, size=(N, length), dtype=np.int64)


def random_files(cfg: PlacementConfig, seed: int) -> np.ndarray:
    return random_symbols(cfg.N, cfg.F, cfg.p, seed)


def subfile(files: np.ndarray, file: int, rank: int, L: int) -> np.ndarray:
    return files[file - 1, rank * L : (rank + 1) * L]


def _check_files(cfg: PlacementConfig, files) -> np.ndarray:
    files = np.asarray(files, dtype=np.int64)
    if files.shape != (cfg.N, cfg.F):
        raise ValueError(f"expected files of shape {(cfg.N, cfg.F)}, got {files.shape}")
    return files


def _check_perm(perm: Sequence[int], N: int) -> tuple[int, ...]:
    perm = tuple(int(x) for x in perm)
    if sorted(perm) != list(range(1, N + 1)):
        raise ValueError(f"{perm} is not a permutation of 1..{N}")
    return perm


def place_with_permutations(
    cfg: PlacementConfig,
    files: Optional[np.ndarray],
    perms: Sequence[Sequence[int]],
    seed: Optional[int] = None,
) -> CacheMap:
    """Placement where user ``j`` stores ``(i, chain)`` iff ``j`` is in level ``perms[j][i]``.

    ``perms`` holds one 1-based permutation of the files per user.  Passing
    ``files=None`` builds the index-only map.
    """
    if len(perms) != cfg.K:
        raise ValueError(f"need {cfg.K} permutations, got {len(perms)}")
    perms = [_check_perm(pm, cfg.N) for pm in perms]
    if files is not None:
        files = _check_files(cfg, files)
    chains = enumerate_chains(cfg.K, cfg.r)
    users = []
    for k in range(1, cfg.K + 1):
        pm = perms[k - 1]
        entries: list[Entry] = []
        payloads: Optional[dict[Entry, np.ndarray]] = {} if files is not None else None
        for i in range(1, cfg.N + 1):
            level = pm[i - 1] - 1
            for rank, chain in enumerate(chains):
                if k in chain[level]:
                    entries.append((i, chain))
                    if payloads is not None:
                        payloads[(i, chain)] = subfile(files, i, rank, cfg.L).copy()
        users.append(UserCache(k, entries, payloads))
    identity = all(pm == tuple(range(1, cfg.N + 1)) for pm in perms)
    return CacheMap(cfg, users, perms=None if identity else list(perms), seed=seed)


def place(cfg: PlacementConfig, files: Optional[np.ndarray], seed: Optional[int] = None) -> CacheMap:
    ident = tuple(range(1, cfg.N + 1))
    return place_with_permutations(cfg, files, [ident] * cfg.K, seed=seed)


def attach_payloads(cmap: CacheMap, files: np.ndarray) -> CacheMap:
    """Fill payloads of an index-only map from the full files."""
    cfg = cmap.cfg
    files = _check_files(cfg, files)
    pos = chain_positions(cfg.K, cfg.r)
    for u in cmap.users:
        u.payloads = {(f, c): subfile(files, f, pos[c], cfg.L).copy() for f, c in u.entries}
    return cmap
