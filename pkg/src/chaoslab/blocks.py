"""Marker-block system: block families over a q-schedule, the free-position
coding bijection, marker rows, fiber sampling and the central-block partition
scheme.

Level-k blocks are built by the recursion  C_1 = {ww : w in {0,1}^{q_1}},
B_k = (C_{k-1})^{q_k}, C_k = {BB : B in B_k};  a C_k member has length
N_k = p_k * 2^k (p_k = q_1...q_k) and is determined by the p_k bits written
at its free positions. All percentage claims about these blocks are exact
rationals.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    GuardExceeded,
    MembershipError,
    SchemeError,
    UsageError,
    ValidationError,
)
from .systems import OrbitPair, Trajectory, ZeroEntropy

DEFAULT_WINDOW_BUDGET = 1 << 24
ENUMERATION_LIMIT = 16  # enumerate C_k only while p_k <= 16


@dataclass(frozen=True)
class QSchedule:
    """Integers q_1..q_K >= 2 with the derived block parameters."""

    q: tuple[int, ...]

    def __post_init__(self):
        q = tuple(int(x) for x in self.q)
        object.__setattr__(self, "q", q)
        if not q:
            raise ValidationError("q-schedule must be nonempty")
        if any(x < 2 for x in q):
            raise ValidationError("every q_k must be >= 2")

    @property
    def depth(self) -> int:
        return len(self.q)

    def p(self, k: int) -> int:
        self._check_level(k)
        prod = 1
        for x in self.q[:k]:
            prod *= x
        return prod

    def n(self, k: int) -> int:
        return self.p(k) * 2**k

    def family_size(self, k: int) -> int:
        return 2 ** self.p(k)

    def b_length(self, k: int) -> int:
        return self.p(k) * 2 ** (k - 1)

    def _check_level(self, k: int) -> None:
        if not 1 <= k <= self.depth:
            raise ValidationError(f"level {k} outside 1..{self.depth}")


@dataclass(frozen=True)
class LevelParams:
    k: int
    q_k: int
    p_k: int
    n_k: int
    b_length: int
    family_size: int


def derive_params(
    schedule: QSchedule, window_budget: int = DEFAULT_WINDOW_BUDGET
) -> list[LevelParams]:
    """Exact integer parameter table for every level of the schedule."""
    if schedule.n(schedule.depth) > window_budget:
        raise GuardExceeded(
            f"N_{schedule.depth} = {schedule.n(schedule.depth)} exceeds the "
            f"window budget {window_budget}"
        )
    return [
        LevelParams(
            k=k,
            q_k=schedule.q[k - 1],
            p_k=schedule.p(k),
            n_k=schedule.n(k),
            b_length=schedule.b_length(k),
            family_size=schedule.family_size(k),
        )
        for k in range(1, schedule.depth + 1)
    ]


def encode_block(schedule: QSchedule, k: int, free_bits: Sequence[int]) -> np.ndarray:
    """Write the p_k free bits through the recursion; returns the C_k member
    of length N_k."""
    schedule._check_level(k)
    bits = np.asarray(free_bits, dtype=np.int8)
    if bits.ndim != 1 or bits.size != schedule.p(k):
        raise ValidationError(
            f"level {k} needs exactly p_{k} = {schedule.p(k)} free bits, "
            f"got {bits.size}"
        )
    if bits.size and not np.all((bits == 0) | (bits == 1)):
        raise ValidationError("free bits must be 0/1")
    rows = bits.reshape(-1, schedule.q[0])
    rows = np.concatenate([rows, rows], axis=1)  # C_1 members
    for level in range(2, k + 1):
        qk = schedule.q[level - 1]
        rows = rows.reshape(rows.shape[0] // qk, qk * rows.shape[1])  # B_level
        rows = np.concatenate([rows, rows], axis=1)  # C_level
    out = rows[0]
    if out.size != schedule.n(k):
        raise ValidationError("encoded block has wrong length")  # pragma: no cover
    return out


def inverse_pi(schedule: QSchedule, k: int, word: Sequence[int]) -> np.ndarray:
    """Two-sided inverse of pi on C_k: identical to encode_block."""
    return encode_block(schedule, k, word)


@dataclass(frozen=True)
class FreeLayout:
    """Free positions of a level-k block and, per free position, the
    positions forced to repeat it. Classes {f} + copies partition [0, N_k)."""

    level: int
    free: tuple[int, ...]
    copies: dict[int, tuple[int, ...]]

    def classes(self) -> list[tuple[int, ...]]:
        return [tuple(sorted((f,) + self.copies[f])) for f in self.free]


def free_positions(schedule: QSchedule, k: int) -> FreeLayout:
    schedule._check_level(k)

    def layout(level: int) -> list[list[int]]:
        # class list ordered by free position; class[0] is the free position
        if level == 1:
            return [[f, f + schedule.q[0]] for f in range(schedule.q[0])]
        inner = layout(level - 1)
        n_prev = schedule.n(level - 1)
        half = schedule.b_length(level)
        out = []
        for i in range(schedule.q[level - 1]):
            for cls in inner:
                shifted = [i * n_prev + x for x in cls]
                out.append(shifted + [x + half for x in shifted])
        return out

    classes = layout(k)
    free = tuple(cls[0] for cls in classes)
    copies = {cls[0]: tuple(sorted(cls[1:])) for cls in classes}
    return FreeLayout(level=k, free=free, copies=copies)


def pi(schedule: QSchedule, k: int, block: Sequence[int]) -> np.ndarray:
    """Read the free positions of a C_k member left to right."""
    row = np.asarray(block, dtype=np.int8)
    if row.size != schedule.n(k):
        raise MembershipError(
            f"C_{k} members have length {schedule.n(k)}, got {row.size}"
        )
    if not np.all((row == 0) | (row == 1)):
        raise MembershipError("block is not a binary row")
    word = row[list(free_positions(schedule, k).free)]
    if not np.array_equal(encode_block(schedule, k, word), row):
        raise MembershipError(f"block is not a member of C_{k}")
    return word


def is_member(schedule: QSchedule, k: int, block: Sequence[int]) -> bool:
    try:
        pi(schedule, k, block)
        return True
    except MembershipError:
        return False


def enumerate_family(schedule: QSchedule, k: int) -> np.ndarray:
    """All C_k members as a (2^p_k, N_k) array, ordered by their pi-word read
    as a big-endian integer."""
    pk = schedule.p(k)
    if pk > ENUMERATION_LIMIT:
        raise GuardExceeded(
            f"enumeration of C_{k} needs 2^{pk} blocks; limit is p_k <= {ENUMERATION_LIMIT}"
        )
    count = 2**pk
    words = ((np.arange(count)[:, None] >> np.arange(pk - 1, -1, -1)) & 1).astype(np.int8)
    rows = words.reshape(count, -1, schedule.q[0])
    rows = np.concatenate([rows, rows], axis=2)
    for level in range(2, k + 1):
        qk = schedule.q[level - 1]
        c, groups, width = rows.shape
        rows = rows.reshape(c, groups // qk, qk * width)
        rows = np.concatenate([rows, rows], axis=2)
    return rows.reshape(count, schedule.n(k))


def project_position(schedule: QSchedule, k: int, j: int) -> int:
    """Coordinate descent [0, N_k) -> [0, p_k): drop the repetition-copy
    index, keep the component index, recurse."""
    schedule._check_level(k)
    if not 0 <= j < schedule.n(k):
        raise ValidationError(f"position {j} outside [0, {schedule.n(k)})")

    def descend(level: int, pos: int) -> int:
        if level == 1:
            return pos % schedule.q[0]
        half = schedule.b_length(level)
        if pos >= half:
            pos -= half
        i, rest = divmod(pos, schedule.n(level - 1))
        return i * schedule.p(level - 1) + descend(level - 1, rest)

    return descend(k, j)


def marker_row(
    schedule: QSchedule, offset: int = 0, length: int | None = None
) -> np.ndarray:
    """Marker value at position j = max{k <= K : j = offset mod N_k}, else 0.
    The top level is capped at K; no infinite marker is ever emitted."""
    top = schedule.n(schedule.depth)
    if not 0 <= offset < top:
        raise ValidationError(f"offset must lie in [0, {top})")
    if length is None:
        length = top
    js = np.arange(length, dtype=np.int64)
    row = np.zeros(length, dtype=np.int64)
    for k in range(1, schedule.depth + 1):
        row[(js - offset) % schedule.n(k) == 0] = k
    return row


@dataclass(frozen=True, eq=False)
class TwoRowWord:
    """One or more top-level blocks with a marker row; `offset` is the block
    position of time zero, so times 0..len(binary)-offset-1 are readable."""

    schedule: QSchedule
    offset: int
    binary: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        row = np.asarray(self.binary, dtype=np.int8)
        object.__setattr__(self, "binary", row)
        top = self.schedule.n(self.schedule.depth)
        if row.size == 0 or row.size % top != 0:
            raise ValidationError("binary row must be a whole number of top blocks")
        if not 0 <= self.offset < top:
            raise ValidationError(f"offset must lie in [0, {top})")

    @property
    def blocks(self) -> int:
        return self.binary.size // self.schedule.n(self.schedule.depth)

    @property
    def offset_chain(self) -> tuple[int, ...]:
        """Per-level position of time zero inside its enclosing k-block;
        consecutive entries agree modulo N_k."""
        return tuple(self.offset % self.schedule.n(k) for k in range(1, self.schedule.depth + 1))

    @property
    def markers(self) -> np.ndarray:
        return marker_row(self.schedule, 0, self.binary.size)

    @property
    def available_horizon(self) -> int:
        return self.binary.size - self.offset

    def symbol_track(self, horizon: int | None = None) -> np.ndarray:
        if horizon is None:
            horizon = self.available_horizon
        if horizon > self.available_horizon:
            raise UsageError(
                f"horizon {horizon} exceeds available {self.available_horizon} "
                f"(window length minus offset)"
            )
        return self.binary[self.offset : self.offset + horizon].astype(np.int64)

    def marker_track(self, horizon: int | None = None) -> np.ndarray:
        if horizon is None:
            horizon = self.available_horizon
        if horizon > self.available_horizon:
            raise UsageError("horizon exceeds the available window")
        return self.markers[self.offset : self.offset + horizon]

    def validate(self) -> None:
        """Check that every top-level window is a family member (membership
        at the top level forces it at every lower level)."""
        top = self.schedule.n(self.schedule.depth)
        for i in range(self.blocks):
            window = self.binary[i * top : (i + 1) * top]
            if not is_member(self.schedule, self.schedule.depth, window):
                raise MembershipError(f"window {i} is not a C_{self.schedule.depth} member")


def sample_point(
    schedule: QSchedule,
    seed: int,
    window_budget: int = DEFAULT_WINDOW_BUDGET,
    blocks: int = 1,
    offset: int | None = None,
) -> TwoRowWord:
    """Uniform offset and uniform free bits: every (offset, free-word) atom
    has probability 1/(N_K 2^{p_K}). Extra blocks draw fresh free words."""
    top_n = schedule.n(schedule.depth)
    if top_n * blocks > window_budget:
        raise GuardExceeded(
            f"window of {blocks} block(s) of length {top_n} exceeds budget {window_budget}"
        )
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    if offset is None:
        offset = int(rng.integers(0, top_n))
    pk = schedule.p(schedule.depth)
    rows = [
        encode_block(schedule, schedule.depth, rng.integers(0, 2, pk))
        for _ in range(blocks)
    ]
    return TwoRowWord(schedule, offset, np.concatenate(rows), seed=seed)


def word_from_free_words(
    schedule: QSchedule, free_words: np.ndarray, offset: int = 0
) -> TwoRowWord:
    """Pull an image-side track back through the coding bijection, one
    top-level block per p_K-bit row."""
    words = np.asarray(free_words, dtype=np.int8)
    pk = schedule.p(schedule.depth)
    if words.ndim == 1:
        if words.size % pk != 0:
            raise ValidationError(f"flat free-word track must be a multiple of p_K={pk}")
        words = words.reshape(-1, pk)
    if words.shape[1] != pk:
        raise ValidationError(f"free words must have p_K = {pk} bits")
    rows = [encode_block(schedule, schedule.depth, w) for w in words]
    return TwoRowWord(schedule, offset, np.concatenate(rows))


def trajectory_from_word(word: TwoRowWord, horizon: int | None = None) -> Trajectory:
    if horizon is None:
        horizon = word.available_horizon
    return Trajectory(
        spec=ZeroEntropy(word.schedule),
        horizon=horizon,
        seed=word.seed,
        symbols=word.symbol_track(horizon),
        source=word,
    )


def fiber_pair(
    schedule: QSchedule,
    seeds: tuple[int, int],
    offset: int | None = None,
    blocks: int = 1,
    horizon: int | None = None,
) -> OrbitPair:
    """Two words over identical marker rows (shared offset) with independent
    uniform free bits."""
    sa, sb = seeds
    if sa == sb:
        raise UsageError("fiber pair requires distinct seeds")
    if offset is None:
        # derive the shared offset from both seeds, away from either bit stream
        offset_rng = np.random.default_rng(np.random.SeedSequence([sa, sb]))
        offset = int(offset_rng.integers(0, schedule.n(schedule.depth)))
    wa = sample_point(schedule, sa, blocks=blocks, offset=offset)
    wb = sample_point(schedule, sb, blocks=blocks, offset=offset)
    return OrbitPair(
        trajectory_from_word(wa, horizon), trajectory_from_word(wb, horizon), "same-fiber"
    )


# --- percentages -------------------------------------------------------------


def entry_disagreement(block_a: Sequence[int], block_b: Sequence[int]) -> Fraction:
    """Exact fraction of entries where the two rows differ."""
    a = np.asarray(block_a, dtype=np.int8)
    b = np.asarray(block_b, dtype=np.int8)
    if a.size != b.size:
        raise ValidationError("blocks must have equal length")
    return Fraction(int(np.count_nonzero(a != b)), int(a.size))


def disagreement_fraction(
    schedule: QSchedule,
    block_a: Sequence[int],
    block_b: Sequence[int],
    component_level: int,
) -> Fraction:
    """Exact fraction of component level-k blocks (canonical decomposition)
    where two members of the same family differ."""
    a = np.asarray(block_a, dtype=np.int8)
    b = np.asarray(block_b, dtype=np.int8)
    outer = _infer_level(schedule, a.size)
    if not is_member(schedule, outer, a) or not is_member(schedule, outer, b):
        raise MembershipError(f"both blocks must be members of C_{outer}")
    if not 1 <= component_level < outer:
        raise ValidationError("component level must satisfy k < k'")
    nk = schedule.n(component_level)
    comps_a = a.reshape(-1, nk)
    comps_b = b.reshape(-1, nk)
    differ = int(np.count_nonzero(np.any(comps_a != comps_b, axis=1)))
    return Fraction(differ, comps_a.shape[0])


def image_component_disagreement(
    schedule: QSchedule,
    word_a: Sequence[int],
    word_b: Sequence[int],
    component_level: int,
) -> Fraction:
    """Image-side analog: fraction of p_k-bit groups where two pi-words
    differ."""
    a = np.asarray(word_a, dtype=np.int8)
    b = np.asarray(word_b, dtype=np.int8)
    if a.size != b.size:
        raise ValidationError("words must have equal length")
    pk = schedule.p(component_level)
    if a.size % pk != 0:
        raise ValidationError("word length must be a multiple of p_k")
    ga = a.reshape(-1, pk)
    gb = b.reshape(-1, pk)
    differ = int(np.count_nonzero(np.any(ga != gb, axis=1)))
    return Fraction(differ, ga.shape[0])


def _infer_level(schedule: QSchedule, length: int) -> int:
    for k in range(1, schedule.depth + 1):
        if schedule.n(k) == length:
            return k
    raise MembershipError(f"length {length} matches no level of the schedule")


# --- central-block partition scheme -----------------------------------------


def central_block_scheme(schedule: QSchedule):
    """Label at depth k and time n = (position of n inside its enclosing
    k-block, content of that block). Requires trajectories carrying a
    TwoRowWord source. Refining: the enclosing (k+1)-block determines the
    k-block."""
    from .classify import PartitionScheme

    def label(k: int, traj: Trajectory, n: int):
        word = traj.source
        if not isinstance(word, TwoRowWord):
            raise SchemeError("central-block scheme needs a TwoRowWord source")
        if word.schedule != schedule:
            raise SchemeError("trajectory was built over a different schedule")
        nk = schedule.n(k)
        pos = word.offset + n
        if not 0 <= pos < word.binary.size:
            raise SchemeError(f"time {n} outside the word's window")
        start = pos - pos % nk
        return (pos % nk, word.binary[start : start + nk].tobytes())

    def same_atom_mask(pair: OrbitPair, k: int) -> np.ndarray:
        wa, wb = pair.a.source, pair.b.source
        if not isinstance(wa, TwoRowWord) or not isinstance(wb, TwoRowWord):
            raise SchemeError("central-block scheme needs TwoRowWord sources")
        horizon = pair.horizon
        nk = schedule.n(k)
        pos_a = wa.offset + np.arange(horizon)
        pos_b = wb.offset + np.arange(horizon)
        if wa.offset % nk != wb.offset % nk:
            return np.zeros(horizon, dtype=bool)  # positions never align
        blocks_a = wa.binary[: (wa.binary.size // nk) * nk].reshape(-1, nk)
        blocks_b = wb.binary[: (wb.binary.size // nk) * nk].reshape(-1, nk)
        eq_rows = np.all(
            blocks_a[: min(len(blocks_a), len(blocks_b))]
            == blocks_b[: min(len(blocks_a), len(blocks_b))],
            axis=1,
        )
        ia = pos_a // nk
        ib = pos_b // nk
        if wa.offset == wb.offset:
            return eq_rows[ia]
        # same residue mod N_k but different block indices: compare contents
        va = blocks_a[ia]
        vb = blocks_b[ib]
        return np.all(va == vb, axis=1)

    atom_bounds = {
        k: schedule.n(k) * schedule.family_size(k) for k in range(1, schedule.depth + 1)
    }
    return PartitionScheme(
        label=label,
        depth=schedule.depth,
        atom_bounds=atom_bounds,
        same_atom_mask=same_atom_mask,
        name=f"central-block(q={','.join(map(str, schedule.q))})",
    )


def aligned_window_scheme(window_lengths: Sequence[int], name: str = "aligned-window"):
    """Partition by (phase, content) of the enclosing aligned window of
    length L_k; L_k must divide L_{k+1}. Works on plain symbol tracks
    (offset 0). This is the image-side counterpart of the central-block
    scheme."""
    from .classify import PartitionScheme

    lengths = tuple(int(x) for x in window_lengths)
    if any(b % a != 0 for a, b in zip(lengths, lengths[1:])):
        raise ValidationError("each window length must divide the next")

    def label(k: int, traj: Trajectory, n: int):
        lk = lengths[k - 1]
        track = traj.symbols
        start = n - n % lk
        # trailing window truncated at the horizon; phases keep labels distinct
        return (n % lk, track[start : min(start + lk, traj.horizon)].tobytes())

    def same_atom_mask(pair: OrbitPair, k: int) -> np.ndarray:
        lk = lengths[k - 1]
        full = (pair.horizon // lk) * lk
        eq = np.all(
            pair.a.symbols[:full].reshape(-1, lk) == pair.b.symbols[:full].reshape(-1, lk),
            axis=1,
        )
        out = np.empty(pair.horizon, dtype=bool)
        out[:full] = np.repeat(eq, lk)
        out[full:] = np.array_equal(pair.a.symbols[full:], pair.b.symbols[full:])
        return out

    return PartitionScheme(
        label=label,
        depth=len(lengths),
        atom_bounds=None,
        same_atom_mask=same_atom_mask,
        name=name,
    )
