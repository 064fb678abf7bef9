"""Cache-line encodings and the encoding energy study.

Four reversible transforms can be applied to payloads before they cross the
module's peripheral circuitry:

* ``BASELINE``: identity.
* ``BDI``: base-delta-immediate compression; compressed bytes are zero-padded
  back to 64 so the burst count is unchanged (this study scores energy, not
  bandwidth).  Incompressible lines pass through untouched.
* ``OPTIMIZED``: a per-byte codebook built from the trace's byte-value
  histogram, mapping frequent bytes to low-popcount codewords.  This
  minimizes ones on the read path but raises write current, whose data
  dependency has the opposite sign.
* ``OWI``: optimized-with-write-inversion.  Reads transfer the optimized
  pattern as stored in the cells; writes transfer its bitwise complement,
  which the chip re-inverts before storing.  Both directions therefore move
  a favorable pattern through the peripheral circuitry.

The study harness rewrites each transfer's payload with the scheme's
stored/wire pattern (ones and toggles are recomputed over those patterns),
stretches every RD/WR by one cycle for the table-lookup schemes, adds an
optional per-access encoding energy, and normalizes totals to BASELINE.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence

from .datadep import Operation
from .energy import EnergyBreakdown, EngineOptions, compute_energy
from .errors import NoPayloads, VampireError
from .profiles import VendorProfile
from .trace import Command, PAYLOAD_BYTES

_COMPLEMENT = bytes(255 - v for v in range(256))


class Scheme(Enum):
    BASELINE = "baseline"
    BDI = "bdi"
    OPTIMIZED = "optimized"
    OWI = "owi"


# Schemes that use the byte-codebook lookup table and therefore pay the
# one-cycle latency and per-access encoding energy.
_TABLE_SCHEMES = (Scheme.OPTIMIZED, Scheme.OWI)


@dataclass(frozen=True)
class ByteCodebook:
    """A byte-value permutation and its inverse.

    The rank-k most frequent byte maps to the k-th smallest codeword under
    (popcount, value) ordering, so frequent bytes cross the wires with few
    ones.
    """

    encode_table: bytes
    decode_table: bytes

    def apply(self, line: bytes) -> bytes:
        return line.translate(self.encode_table)

    def unapply(self, line: bytes) -> bytes:
        return line.translate(self.decode_table)


def codebook_from_histogram(counts: Sequence[int]) -> ByteCodebook:
    """Build the codebook for a 256-entry byte histogram.

    Frequency ties break toward the smaller byte value; codewords are ranked
    by (popcount, value).
    """
    if len(counts) != 256:
        raise ValueError("histogram must have 256 entries")
    ranked = sorted(range(256), key=lambda v: (-counts[v], v))
    codewords = sorted(range(256), key=lambda v: (v.bit_count(), v))
    encode = bytearray(256)
    decode = bytearray(256)
    for byte, codeword in zip(ranked, codewords):
        encode[byte] = codeword
        decode[codeword] = byte
    return ByteCodebook(bytes(encode), bytes(decode))


def payload_histogram(trace: list[Command]) -> list[int]:
    """Byte-value counts over every payload in the trace."""
    counts = Counter()
    for cmd in trace:
        if cmd.payload is not None:
            counts.update(cmd.payload)
    return [counts.get(v, 0) for v in range(256)]


def build_codebook(trace: list[Command]) -> ByteCodebook:
    """Histogram the trace's payload bytes and build the codebook."""
    counts = payload_histogram(trace)
    if sum(counts) == 0:
        raise NoPayloads("trace carries no payloads to build a codebook from")
    return codebook_from_histogram(counts)


# ---------------------------------------------------------------------------
# Base-delta-immediate compression
# ---------------------------------------------------------------------------

_BDI_CONFIGS = ((8, 1), (8, 2), (8, 4), (4, 1), (4, 2), (2, 1))


@dataclass(frozen=True)
class BdiEncoding:
    """One compressed representation: the special cases store no deltas."""

    kind: str              # zeros | repeat | base_delta
    base_size: int
    delta_size: int
    data: bytes
    size_bytes: int


def bdi_compress(line: bytes) -> Optional[BdiEncoding]:
    """Smallest fitting BDI representation of a 64-byte line, or None.

    Tries the all-zero and repeated-8-byte-value special cases plus the
    standard (base, delta) byte-size configurations with the first value as
    the base and signed deltas.
    """
    if len(line) != PAYLOAD_BYTES:
        raise ValueError("BDI operates on 64-byte lines")
    candidates: list[BdiEncoding] = []
    if line.count(0) == PAYLOAD_BYTES:
        candidates.append(BdiEncoding("zeros", 0, 0, b"", 1))
    elif line == line[:8] * 8:
        candidates.append(BdiEncoding("repeat", 8, 0, line[:8], 8))
    for base_size, delta_size in _BDI_CONFIGS:
        n_values = PAYLOAD_BYTES // base_size
        values = [
            int.from_bytes(line[i * base_size:(i + 1) * base_size], "little")
            for i in range(n_values)
        ]
        base = values[0]
        limit = 1 << (8 * delta_size - 1)
        deltas = [v - base for v in values]
        if all(-limit <= d < limit for d in deltas):
            data = base.to_bytes(base_size, "little") + b"".join(
                d.to_bytes(delta_size, "little", signed=True) for d in deltas
            )
            candidates.append(
                BdiEncoding("base_delta", base_size, delta_size, data,
                            base_size + n_values * delta_size)
            )
    if not candidates:
        return None
    return min(candidates, key=lambda c: c.size_bytes)


def bdi_decompress(enc: BdiEncoding) -> bytes:
    """Reconstruct the original 64-byte line."""
    if enc.kind == "zeros":
        return bytes(PAYLOAD_BYTES)
    if enc.kind == "repeat":
        return enc.data * 8
    base = int.from_bytes(enc.data[:enc.base_size], "little")
    n_values = PAYLOAD_BYTES // enc.base_size
    out = bytearray()
    offset = enc.base_size
    for _ in range(n_values):
        delta = int.from_bytes(
            enc.data[offset:offset + enc.delta_size], "little", signed=True
        )
        out += (base + delta).to_bytes(enc.base_size, "little")
        offset += enc.delta_size
    return bytes(out)


# ---------------------------------------------------------------------------
# Line encoding / decoding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EncodedLine:
    """A transformed line: ``stored`` is the bit pattern that crosses the
    peripheral circuitry (zero-padded for compressible BDI lines)."""

    scheme: Scheme
    direction: Operation
    stored: bytes
    meta: Optional[BdiEncoding] = None


def encode_line(
    line: bytes,
    scheme: Scheme,
    codebook: Optional[ByteCodebook] = None,
    direction: Operation = Operation.READ,
) -> EncodedLine:
    """Apply a scheme to one 64-byte line."""
    if len(line) != PAYLOAD_BYTES:
        raise ValueError("lines are exactly 64 bytes")
    if scheme is Scheme.BASELINE:
        return EncodedLine(scheme, direction, line)
    if scheme is Scheme.BDI:
        enc = bdi_compress(line)
        if enc is None:
            return EncodedLine(scheme, direction, line)
        stored = enc.data + bytes(PAYLOAD_BYTES - len(enc.data))
        return EncodedLine(scheme, direction, stored, meta=enc)
    if codebook is None:
        raise ValueError(f"{scheme.value} needs a codebook")
    optimized = codebook.apply(line)
    if scheme is Scheme.OPTIMIZED:
        return EncodedLine(scheme, direction, optimized)
    # OWI: cells hold the optimized pattern; the write path moves its
    # complement through the peripheral circuitry and the chip re-inverts.
    if direction is Operation.WRITE:
        return EncodedLine(scheme, direction, optimized.translate(_COMPLEMENT))
    return EncodedLine(scheme, direction, optimized)


def decode_line(
    encoded: EncodedLine, codebook: Optional[ByteCodebook] = None
) -> bytes:
    """Recover the original line from its encoded form."""
    scheme = encoded.scheme
    if scheme is Scheme.BASELINE:
        return encoded.stored
    if scheme is Scheme.BDI:
        if encoded.meta is None:
            return encoded.stored
        return bdi_decompress(encoded.meta)
    if codebook is None:
        raise ValueError(f"{scheme.value} needs a codebook")
    stored = encoded.stored
    if scheme is Scheme.OWI and encoded.direction is Operation.WRITE:
        stored = stored.translate(_COMPLEMENT)
    return codebook.unapply(stored)


# ---------------------------------------------------------------------------
# Study harness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SchemeResult:
    scheme: Scheme
    breakdown: EnergyBreakdown
    encode_overhead_nj: float
    total_nj: float
    ratio_to_baseline: float


def rewrite_trace(
    trace: list[Command],
    scheme: Scheme,
    codebook: Optional[ByteCodebook] = None,
) -> list[Command]:
    """Re-encode every transfer payload; the table-lookup schemes also delay
    everything after each RD/WR by the one-cycle lookup latency."""
    stretch = scheme in _TABLE_SCHEMES
    offset = 0
    out = []
    for cmd in trace:
        cycle = cmd.cycle + offset
        if cmd.is_transfer():
            if cmd.payload is None:
                raise VampireError(
                    f"cycle {cmd.cycle}: encoding study needs payload-mode traces"
                )
            direction = Operation.READ if cmd.kind.value == "RD" else Operation.WRITE
            encoded = encode_line(cmd.payload, scheme, codebook, direction)
            out.append(replace(cmd, cycle=cycle, payload=encoded.stored))
            if stretch:
                offset += 1
        else:
            out.append(replace(cmd, cycle=cycle))
    return out


def run_encoding_study(
    trace: list[Command],
    profile: VendorProfile,
    schemes: Sequence[Scheme] = tuple(Scheme),
    options: Optional[EngineOptions] = None,
    encode_energy_nj: float = 0.0,
) -> list[SchemeResult]:
    """Score each scheme on the trace, normalized to BASELINE.

    ``encode_energy_nj`` is charged once per RD/WR for the table-lookup
    schemes.  The default 0 treats the lookup as free, which suits limit
    studies; override it to model a real table implementation.
    """
    ordered = list(dict.fromkeys(schemes))
    needs_codebook = any(s in _TABLE_SCHEMES for s in ordered)
    codebook = build_codebook(trace) if needs_codebook else None
    n_accesses = sum(1 for cmd in trace if cmd.is_transfer())

    scored: dict[Scheme, tuple[EnergyBreakdown, float, float]] = {}

    def score(scheme: Scheme) -> tuple[EnergyBreakdown, float, float]:
        if scheme not in scored:
            rewritten = rewrite_trace(trace, scheme, codebook)
            breakdown = compute_energy(rewritten, profile, options)
            overhead = (encode_energy_nj * n_accesses
                        if scheme in _TABLE_SCHEMES else 0.0)
            scored[scheme] = (breakdown, overhead, breakdown.total_nj + overhead)
        return scored[scheme]

    baseline_total = score(Scheme.BASELINE)[2]
    results = []
    for scheme in ordered:
        breakdown, overhead, total = score(scheme)
        results.append(
            SchemeResult(scheme, breakdown, overhead, total, total / baseline_total)
        )
    return results
