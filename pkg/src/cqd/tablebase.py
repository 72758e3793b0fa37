"""WDL tables: 2-bit label storage, the on-disk format, and cross-table lookup."""

from __future__ import annotations

import enum
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .index import encode, layout, space_size
from .material import (
    MaterialSignature, canonicalize_for_storage, parse_signature, signature_of,
)
from .rules import BLACK, WHITE, Kind, Position

__all__ = [
    "Label", "WdlTable", "SubModelSet", "CrossLinks", "get_label", "lookup_cross",
    "save", "load", "pack_labels", "unpack_labels", "TableFormatError",
    "ChecksumError", "VersionError", "MissingSubModelError", "FORMAT_VERSION", "MAGIC",
]

MAGIC = b"CQDT"
FORMAT_VERSION = 1
FLAG_ROUNDS = 1


class Label(enum.IntEnum):
    LOSS = 0
    DRAW = 1
    WIN = 2
    INVALID = 3

    @property
    def letter(self) -> str:
        return "LDWI"[self]


class TableFormatError(ValueError):
    pass


class ChecksumError(TableFormatError):
    pass


class VersionError(TableFormatError):
    pass


class MissingSubModelError(KeyError):
    pass


def pack_labels(labels: np.ndarray) -> np.ndarray:
    n = labels.size
    padded = np.zeros(-(-n // 4) * 4, np.uint8)
    padded[:n] = labels
    q = padded.reshape(-1, 4)
    return (q[:, 0] | (q[:, 1] << 2) | (q[:, 2] << 4) | (q[:, 3] << 6)).astype(np.uint8)


def unpack_labels(packed: np.ndarray, n: int) -> np.ndarray:
    out = np.empty((packed.size, 4), np.uint8)
    for j in range(4):
        out[:, j] = (packed >> (2 * j)) & 3
    return out.reshape(-1)[:n].copy()


@dataclass(eq=False)
class WdlTable:
    """Labels for every code of one stored signature.

    ``labels`` is kept unpacked (one uint8 per code) in memory for kernel
    access; packing to 2 bits happens on serialization.
    """

    signature: MaterialSignature
    labels: np.ndarray
    rounds: Optional[np.ndarray] = None
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        self.signature = parse_signature(self.signature)
        size = space_size(self.signature)
        if self.labels.shape != (size,):
            raise ValueError(f"{self.signature.name}: expected {size} labels, got {self.labels.shape}")
        self.labels = np.ascontiguousarray(self.labels, dtype=np.uint8)
        if self.rounds is not None:
            if self.rounds.shape != (size,):
                raise ValueError("rounds must match the label array length")
            self.rounds = np.ascontiguousarray(self.rounds, dtype=np.uint16)

    @property
    def name(self) -> str:
        return self.signature.name

    @property
    def space_size(self) -> int:
        return self.labels.size

    def to_bytes(self) -> bytes:
        name = self.name.encode("ascii")
        flags = FLAG_ROUNDS if self.rounds is not None else 0
        parts = [
            MAGIC,
            struct.pack("<IH", self.format_version, len(name)),
            name,
            struct.pack("<IQ", flags, self.space_size),
            pack_labels(self.labels).tobytes(),
        ]
        if self.rounds is not None:
            parts.append(self.rounds.astype("<u2").tobytes())
        body = b"".join(parts)
        return body + struct.pack("<I", zlib.crc32(body))

    @property
    def checksum(self) -> int:
        return struct.unpack("<I", self.to_bytes()[-4:])[0]

    @classmethod
    def from_bytes(cls, data: bytes) -> "WdlTable":
        if len(data) < 4 + 6 + 12 + 4:
            raise TableFormatError("truncated table file")
        if data[:4] != MAGIC:
            raise TableFormatError("bad magic; not a CQDT table")
        version, name_len = struct.unpack_from("<IH", data, 4)
        if version != FORMAT_VERSION:
            raise VersionError(f"unsupported format version {version} (expected {FORMAT_VERSION})")
        pos = 10
        name = data[pos:pos + name_len].decode("ascii", errors="replace")
        pos += name_len
        if len(data) < pos + 12 + 4:
            raise TableFormatError("truncated table file")
        flags, size = struct.unpack_from("<IQ", data, pos)
        pos += 12
        n_packed = -(-size // 4)
        end = pos + n_packed + (2 * size if flags & FLAG_ROUNDS else 0)
        if len(data) != end + 4:
            raise TableFormatError(f"truncated or oversized table file ({len(data)} bytes, expected {end + 4})")
        (crc,) = struct.unpack_from("<I", data, end)
        if zlib.crc32(data[:end]) != crc:
            raise ChecksumError(f"checksum mismatch in table {name!r}")
        sig = parse_signature(name)
        if space_size(sig) != size:
            raise TableFormatError(f"{name}: space size {size} does not match signature")
        labels = unpack_labels(np.frombuffer(data, np.uint8, n_packed, pos), size)
        rounds = None
        if flags & FLAG_ROUNDS:
            rounds = np.frombuffer(data, "<u2", size, pos + n_packed).astype(np.uint16)
        return cls(sig, labels, rounds, version)

    def with_labels(self, labels: np.ndarray) -> "WdlTable":
        return WdlTable(self.signature, labels, None, self.format_version)

    def equals(self, other: "WdlTable") -> bool:
        return (self.name == other.name and np.array_equal(self.labels, other.labels)
                and (self.rounds is None) == (other.rounds is None)
                and (self.rounds is None or np.array_equal(self.rounds, other.rounds)))


def get_label(t: WdlTable, i: int) -> Label:
    if not 0 <= i < t.space_size:
        raise IndexError(f"index {i} out of range for {t.name}")
    return Label(int(t.labels[i]))


def save(t: WdlTable, path) -> int:
    """Write ``t`` to ``path``; returns the file checksum."""
    data = t.to_bytes()
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(path)
    return struct.unpack("<I", data[-4:])[0]


def load(path) -> WdlTable:
    return WdlTable.from_bytes(Path(path).read_bytes())


@dataclass
class SubModelSet:
    """Verified tables keyed by stored (canonical) signature name."""

    tables: dict = field(default_factory=dict)

    def add(self, t: WdlTable) -> None:
        self.tables[t.name] = t

    def __contains__(self, s) -> bool:
        return canonicalize_for_storage(parse_signature(s))[0].name in self.tables

    def table_for(self, s) -> tuple:
        """(stored table, transform) for any signature, color-swapped or not."""
        rep, transform = canonicalize_for_storage(parse_signature(s))
        try:
            return self.tables[rep.name], transform
        except KeyError:
            raise MissingSubModelError(
                f"sub-model {rep.name} (for {parse_signature(s).name}) is not available") from None

    def require_closed_over(self, s) -> None:
        from .material import capture_successor_signatures
        for succ in capture_successor_signatures(parse_signature(s)):
            self.table_for(succ)


def lookup_cross(sub: SubModelSet, p: Position) -> Label:
    t, transform = sub.table_for(signature_of(p))
    return get_label(t, encode(transform.apply(p), t.signature))


@dataclass(frozen=True)
class CrossLinks:
    """Kernel-facing tables routing material-changing moves into sub-tables."""

    tr_id: np.ndarray
    tr_len: np.ndarray
    tr_perm: np.ndarray
    tr_mirror: np.ndarray
    tr_flip: np.ndarray
    tr_stmw: np.ndarray
    tr_offset: np.ndarray
    tr_dup: np.ndarray
    sub_labels: np.ndarray
    targets: tuple  # stored signature name per transition row

    def as_tuple(self) -> tuple:
        return (self.tr_id, self.tr_len, self.tr_perm, self.tr_mirror, self.tr_flip,
                self.tr_stmw, self.tr_offset, self.tr_dup, self.sub_labels)

    @classmethod
    def structural(cls, s) -> "CrossLinks":
        """Links that enumerate material-changing moves without reading any labels."""
        return cls.build(s, None, structural=True)

    @classmethod
    def build(cls, s, sub: Optional[SubModelSet], structural: bool = False) -> "CrossLinks":
        s = parse_signature(s)
        slots = s.slots()
        k = len(slots)
        promos = (None, Kind.QUEEN, Kind.ROOK, Kind.BISHOP, Kind.KNIGHT)
        tr_id = np.full((k, k + 1, 5), -1, np.int64)
        rows = []
        offsets = {}
        chunks = []
        total = 0
        for j, mover in enumerate(slots):
            for c in range(k + 1):
                if c < k and (slots[c].color == mover.color or slots[c].kind == Kind.KING):
                    continue
                for pr, promo in enumerate(promos):
                    if c == k and promo is None:
                        continue
                    if promo is not None and mover.kind != Kind.PAWN:
                        continue
                    pieces = []
                    for i, pc in enumerate(slots):
                        if i == c:
                            continue
                        kind = promo if (i == j and promo is not None) else pc.kind
                        pieces.append((pc.color, kind, i))
                    target = MaterialSignature(
                        tuple(kd for col, kd, _ in pieces if col == WHITE),
                        tuple(kd for col, kd, _ in pieces if col == BLACK),
                    )
                    rep, transform = canonicalize_for_storage(target)
                    if structural:
                        tr_id[j, c, pr] = len(rows)
                        rows.append((rep, [], False, False, 0))
                        continue
                    if sub is None:
                        raise MissingSubModelError(f"no sub-models supplied; {s.name} needs {rep.name}")
                    table, _ = sub.table_for(target)
                    if rep.name not in offsets:
                        offsets[rep.name] = total
                        chunks.append(table.labels)
                        total += table.labels.size
                    flip = transform.flip_colors
                    order = sorted(pieces, key=lambda e: ((1 - e[0]) if flip else e[0], e[1]))
                    tr_id[j, c, pr] = len(rows)
                    rows.append((rep, [e[2] for e in order], transform.mirror_ranks, flip,
                                 offsets[rep.name]))
        n = len(rows)
        tr_len = np.zeros(n, np.int64)
        tr_perm = np.zeros((n, max(k, 1)), np.int64)
        tr_mirror = np.zeros(n, np.int64)
        tr_flip = np.zeros(n, np.int64)
        tr_stmw = np.zeros(n, np.int64)
        tr_offset = np.zeros(n, np.int64)
        tr_dup = np.zeros((n, max(k, 1)), np.bool_)
        for r, (rep, perm, mirror, flip, off) in enumerate(rows):
            tr_len[r] = len(perm)
            tr_perm[r, :len(perm)] = perm
            tr_mirror[r] = int(mirror)
            tr_flip[r] = int(flip)
            tr_stmw[r] = 64 ** len(perm)
            tr_offset[r] = off
            dp = layout(rep).dup_prev
            tr_dup[r, :dp.size] = dp
        if structural:
            sub_labels = np.full(1, 3, np.uint8)
        else:
            sub_labels = np.concatenate(chunks) if chunks else np.zeros(0, np.uint8)
        return cls(tr_id, tr_len, tr_perm, tr_mirror, tr_flip, tr_stmw, tr_offset, tr_dup,
                   sub_labels, tuple(r[0].name for r in rows))
