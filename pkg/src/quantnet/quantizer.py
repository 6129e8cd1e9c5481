"""Uniform mid-value quantizer with geometric interval refinement.

A quantizer with n bits, interval length l and mid-value vector m maps each
coordinate v to the nearest point of the grid {m + j * l / 2**n} with ties
rounded away from the mid-value.  Inputs inside the interval
[m - l/2, m + l/2] produce levels |j| <= 2**(n-1) and a reconstruction error
of at most l / 2**(n+1) per coordinate; inputs outside clamp to the extreme
level and flag the message as saturated.
"""

import csv
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, MalformedMessage, NonpositiveInterval

# message kind codes on the wire; the high bit of the kind byte carries the
# saturation flag
_KIND_CODES = {"variable": 0, "gradient": 1}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}
_HEADER = struct.Struct("<HBI")  # sender (u16), kind (u8), iteration (u32)

# index levels must stay exactly representable in int64
MAX_BITS = 62


@dataclass(frozen=True)
class UniformQuantizer:
    """Per-iteration quantizer state: bit count, interval length, mid-value."""

    bits: int
    interval: float
    mid: np.ndarray

    def __post_init__(self):
        if not 1 <= self.bits <= MAX_BITS:
            raise ValueError("bits must lie in [1, %d], got %r" % (MAX_BITS, self.bits))
        if not self.interval > 0.0:
            raise NonpositiveInterval("interval must be positive, got %r" % (self.interval,))
        object.__setattr__(self, "mid", np.asarray(self.mid, dtype=float))

    @property
    def step(self):
        # l * 2**-n, exact scaling by a power of two
        return self.interval * 2.0 ** -self.bits


@dataclass(frozen=True)
class QuantizerSchedule:
    """Geometrically shrinking interval l_k = initial * rate**k with rate in (0, 1)."""

    initial: float
    rate: float

    def __post_init__(self):
        if not self.initial > 0.0:
            raise NonpositiveInterval("initial interval must be positive")
        if not 0.0 < self.rate < 1.0:
            raise ValueError("rate must lie strictly inside (0, 1), got %r" % (self.rate,))

    def interval(self, k):
        if k < 0:
            raise ValueError("iteration index must be non-negative")
        return self.initial * self.rate**k


def refine(schedule, k):
    """Interval length of the schedule at iteration k."""
    return schedule.interval(k)


@dataclass(frozen=True)
class QuantizedMessage:
    """One quantized vector: integer levels plus the implied reconstruction."""

    sender: int
    kind: str
    iteration: int
    bits: int
    indices: np.ndarray
    reconstructed: np.ndarray
    saturated: bool


def quantize(q, v, sender=0, kind="variable", iteration=0):
    """Quantize a vector against the quantizer's grid.

    Each coordinate maps to level sgn(v - m) * floor(|v - m| / step + 1/2),
    clamped to +-2**(bits-1).  The message is flagged saturated when any
    coordinate lies strictly outside the interval [m - l/2, m + l/2].
    """
    v = np.asarray(v, dtype=float)
    if v.shape != q.mid.shape:
        raise DimensionMismatch(
            "input of length %d vs quantizer of dimension %d" % (v.size, q.mid.size)
        )
    diff = v - q.mid
    cap = np.int64(1) << (q.bits - 1)
    raw = np.floor(np.abs(diff) / q.step + 0.5)
    idx = np.sign(diff) * raw
    saturated = bool(np.any(np.abs(diff) > 0.5 * q.interval))
    idx = np.clip(idx, -float(cap), float(cap)).astype(np.int64)
    reconstructed = q.mid + idx * q.step
    return QuantizedMessage(
        sender=int(sender),
        kind=str(kind),
        iteration=int(iteration),
        bits=q.bits,
        indices=idx,
        reconstructed=reconstructed,
        saturated=saturated,
    )


def payload_size(count, bits):
    """Payload bytes for ``count`` indices at bits+1 wire bits each."""
    return (count * (bits + 1) + 7) // 8


def encode(msg):
    """Serialise a message: 7 header bytes, then sign-magnitude packed indices.

    Indices occupy bits+1 bits each (one sign bit above ``bits`` magnitude
    bits), packed LSB-first into a little-endian bit stream and padded to a
    byte boundary.
    """
    if msg.kind not in _KIND_CODES:
        raise MalformedMessage("unknown message kind %r" % (msg.kind,))
    kind_byte = _KIND_CODES[msg.kind] | (0x80 if msg.saturated else 0)
    header = _HEADER.pack(msg.sender, kind_byte, msg.iteration)
    width = msg.bits + 1
    acc = 0
    for pos, level in enumerate(int(x) for x in msg.indices):
        sign = 1 if level < 0 else 0
        word = (sign << msg.bits) | abs(level)
        acc |= word << (pos * width)
    return header + acc.to_bytes(payload_size(msg.indices.size, msg.bits), "little")


def decode(data, q):
    """Inverse of :func:`encode` given the receiver's quantizer state.

    Raises
    ------
    MalformedMessage
        If the byte length disagrees with the quantizer dimension and bit
        width, or a magnitude exceeds the level cap.
    """
    count = q.mid.size
    expected = _HEADER.size + payload_size(count, q.bits)
    if len(data) != expected:
        raise MalformedMessage(
            "message of %d bytes, expected %d for %d coordinates at %d bits"
            % (len(data), expected, count, q.bits)
        )
    sender, kind_byte, iteration = _HEADER.unpack_from(data)
    kind = _KIND_NAMES.get(kind_byte & 0x7F)
    if kind is None:
        raise MalformedMessage("unknown kind byte %r" % (kind_byte,))
    width = q.bits + 1
    mask = (1 << width) - 1
    cap = 1 << (q.bits - 1)
    acc = int.from_bytes(data[_HEADER.size :], "little")
    indices = np.empty(count, dtype=np.int64)
    for pos in range(count):
        word = (acc >> (pos * width)) & mask
        magnitude = word & ((1 << q.bits) - 1)
        if magnitude > cap:
            raise MalformedMessage("index magnitude %d exceeds level cap %d" % (magnitude, cap))
        indices[pos] = -magnitude if word >> q.bits else magnitude
    return QuantizedMessage(
        sender=sender,
        kind=kind,
        iteration=iteration,
        bits=q.bits,
        indices=indices,
        reconstructed=q.mid + indices * q.step,
        saturated=bool(kind_byte & 0x80),
    )


@dataclass
class BitLedger:
    """Per-iteration, per-directed-edge bit accounting.

    Nominal bits count n per scalar (the advertised rate); wire bits count
    n+1 per scalar (the sign-magnitude level width actually packed by
    :func:`encode`, excluding headers).  Both are tracked.
    """

    _rows: dict = field(default_factory=dict)  # (k, src, dst) -> [bits, wire_bits]

    def record(self, edge, k, scalar_count, bits_per_scalar):
        if scalar_count < 0:
            raise ValueError("scalar_count must be non-negative")
        src, dst = edge
        row = self._rows.setdefault((int(k), int(src), int(dst)), [0, 0])
        row[0] += scalar_count * bits_per_scalar
        row[1] += scalar_count * (bits_per_scalar + 1)
        return self

    def bits_at(self, edge, k):
        return self._rows.get((k, edge[0], edge[1]), [0, 0])[0]

    def cumulative(self, edge, through_k=None):
        src, dst = edge
        return sum(
            row[0]
            for (k, s, d), row in self._rows.items()
            if s == src and d == dst and (through_k is None or k <= through_k)
        )

    def total_bits(self, through_k=None):
        return sum(
            row[0] for (k, _, _), row in self._rows.items() if through_k is None or k <= through_k
        )

    def total_wire_bits(self, through_k=None):
        return sum(
            row[1] for (k, _, _), row in self._rows.items() if through_k is None or k <= through_k
        )

    def to_csv(self, path):
        """Write rows (k, src, dst, bits, cumulative_bits), sorted, with running per-edge totals."""
        running = {}
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "src", "dst", "bits", "cumulative_bits"])
            for (k, src, dst), row in sorted(self._rows.items()):
                running[(src, dst)] = running.get((src, dst), 0) + row[0]
                writer.writerow([k, src, dst, row[0], running[(src, dst)]])


def record_bits(ledger, edge, k, scalar_count, bits_per_scalar):
    """Add ``scalar_count * bits_per_scalar`` bits to one directed edge at iteration k."""
    return ledger.record(edge, k, scalar_count, bits_per_scalar)
