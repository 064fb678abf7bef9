"""Reference models, error metrics, and JEDEC-style measurement loops.

Three models can score a trace:

* ``VAMPIRE``: the full engine (measured currents, data dependency,
  structural variation).

* ``DRAMPOWER_LITE``: the same interval engine fed worst-case inputs, i.e.
  datasheet IDD values, a flat IDD4R/IDD4W transfer current with no data
  dependency, and no variation.  It is a structural stand-in for
  datasheet-driven command-level models, not a reimplementation of any
  external tool.

* ``MICRON_STYLE``: a utilization-ratio model that prorates per-command
  energies over wall time using datasheet values.  It deliberately keeps the
  two classic deficiencies of spreadsheet-style calculators: idle gaps
  between commands are charged at the all-banks-active standby current, and
  the open-bank count never matters.

``generate_idd_loop`` builds the standardized measurement loops (activate/
precharge hammering, back-to-back reads or writes over all eight banks,
refresh bursts, power-down, ...) as timing-clean traces, useful both for
engine self-checks and as calibration microbenchmarks.
"""

from __future__ import annotations

from dataclasses import replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .datadep import DataDepParams, DataDepTable, Operation
from .dram_state import InterleaveClass
from .energy import (
    BURST_CYCLES,
    EnergyBreakdown,
    EngineOptions,
    compute_energy,
)
from .errors import LengthMismatch, NonPositiveActual, TimingViolationError
from .profiles import TimingParams, VendorProfile
from .trace import Command, CommandKind, DataDistribution, PAYLOAD_BYTES, validate_timing
from .variation import disabled_variation


class ModelKind(Enum):
    VAMPIRE = "vampire"
    MICRON_STYLE = "micron"
    DRAMPOWER_LITE = "drampower-lite"


def mape(predicted: Sequence[float], actual: Sequence[float]) -> float:
    """Mean absolute percentage error, in percent."""
    p = np.asarray(predicted, dtype=float)
    a = np.asarray(actual, dtype=float)
    if p.shape != a.shape or p.ndim != 1 or len(p) == 0:
        raise LengthMismatch(
            f"predicted ({p.shape}) and actual ({a.shape}) must be equal-length, "
            "non-empty vectors"
        )
    if np.any(a <= 0):
        raise NonPositiveActual("actual values must be > 0")
    return float(np.mean(np.abs(p - a) / a) * 100.0)


def relative_error_pct(value: float, reference: float) -> float:
    """Signed relative error of ``value`` against ``reference``, in percent."""
    if reference <= 0:
        raise NonPositiveActual("reference must be > 0")
    return (value - reference) / reference * 100.0


def drampower_lite_profile(profile: VendorProfile) -> VendorProfile:
    """Worst-case view of a profile: datasheet currents everywhere, flat
    transfer currents, variation and I/O split disabled."""
    ds = profile.idd_datasheet_ma
    flat = {}
    for op, key in ((Operation.READ, "idd4r"), (Operation.WRITE, "idd4w")):
        current = profile.idd(key, datasheet=True)
        for klass in InterleaveClass:
            flat[(op, klass)] = DataDepParams(current, 0.0, 0.0)
    return replace(
        profile,
        name=f"{profile.name}[datasheet]",
        idd_measured_ma=dict(ds),
        datadep=DataDepTable(flat),
        variation=disabled_variation(),
        io_per_one_ma=None,
    )


def compute_baseline(
    trace: list[Command],
    profile: VendorProfile,
    kind: ModelKind,
    options: Optional[EngineOptions] = None,
) -> EnergyBreakdown:
    """Score a trace under the named model."""
    opts = options or EngineOptions()
    if kind is ModelKind.VAMPIRE:
        return compute_energy(trace, profile, opts)
    if kind is ModelKind.DRAMPOWER_LITE:
        # Data counts cannot influence the flat table, so payload-free
        # traces are acceptable without an explicit distribution.
        lite_opts = replace(
            opts,
            no_variation=True,
            distribution=opts.distribution or DataDistribution(0.0, 0.0),
        )
        return compute_energy(trace, drampower_lite_profile(profile), lite_opts)
    return _micron_style(trace, profile, opts)


def _micron_style(
    trace: list[Command], profile: VendorProfile, opts: EngineOptions
) -> EnergyBreakdown:
    timings = profile.timings
    if not opts.force:
        violations = validate_timing(trace, timings)
        if violations:
            raise TimingViolationError(violations)
    vdd = profile.vdd_v
    idd = lambda key: profile.idd(key, datasheet=True)
    bg_mix = (idd("idd3n") * timings.tras_ns
              + idd("idd2n") * (timings.trc_ns - timings.tras_ns)) / timings.trc_ns
    pair_nj = (idd("idd0") - bg_mix) * vdd * timings.trc_ns * 1e-3
    read_nj = (idd("idd4r") - idd("idd3n")) * vdd * BURST_CYCLES * timings.tck_ns * 1e-3
    write_nj = (idd("idd4w") - idd("idd3n")) * vdd * BURST_CYCLES * timings.tck_ns * 1e-3
    ref_nj = (idd("idd5b") - idd("idd2n")) * vdd * timings.trfc_ns * 1e-3

    acc = {"act_pre": 0.0, "read": 0.0, "write": 0.0, "refresh": 0.0}
    ledger = []
    end_cycle = trace[-1].cycle if trace else 0
    for cmd in trace:
        energy = 0.0
        if cmd.kind is CommandKind.ACT:
            energy = pair_nj
            acc["act_pre"] += energy
        elif cmd.kind is CommandKind.RD:
            energy = read_nj
            acc["read"] += energy
        elif cmd.kind is CommandKind.WR:
            energy = write_nj
            acc["write"] += energy
        elif cmd.kind is CommandKind.REF:
            energy = ref_nj
            acc["refresh"] += energy
        ledger.append((cmd.cycle, cmd.kind.value, energy))

    # The whole wall time is charged at all-banks-active standby: gaps
    # between commands and power-down intervals are not distinguished.
    background = idd("idd3n") * vdd * end_cycle * timings.tck_ns * 1e-3
    return EnergyBreakdown(
        act_pre_nj=acc["act_pre"],
        read_nj=acc["read"],
        write_nj=acc["write"],
        refresh_nj=acc["refresh"],
        background_active_nj=background,
        background_precharged_nj=0.0,
        power_down_nj=0.0,
        per_command=tuple(ledger),
    )


# ---------------------------------------------------------------------------
# Measurement-loop generation
# ---------------------------------------------------------------------------

IDD_LOOP_KINDS = (
    "idd0", "idd1", "idd2n", "idd3n", "idd4r", "idd4w", "idd5b", "idd7", "idd2p1",
)

_ACT_STAGGER = 4  # cycles between activates to different banks


def generate_idd_loop(
    kind: str,
    timings: TimingParams,
    iterations: int = 64,
    data_byte: int = 0x33,
) -> list[Command]:
    """Build the named measurement loop as a timing-clean trace.

    ``iterations`` controls the loop count; transfers carry the repeated
    ``data_byte`` pattern (the standardized tests use 0x00 and 0x33).
    """
    kind = kind.lower()
    if kind not in IDD_LOOP_KINDS:
        raise ValueError(f"unknown loop kind {kind!r}; expected one of {IDD_LOOP_KINDS}")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    payload = bytes([data_byte]) * PAYLOAD_BYTES
    rcd = timings.cycles(timings.trcd_ns)
    rp = timings.cycles(timings.trp_ns)
    ras = timings.cycles(timings.tras_ns)
    rc = timings.cycles(timings.trc_ns)
    rfc = timings.cycles(timings.trfc_ns)

    cmds: list[Command] = []

    def act(cycle, bank, row=0):
        cmds.append(Command(cycle, CommandKind.ACT, bank=bank, row=row))

    def pre(cycle, bank):
        cmds.append(Command(cycle, CommandKind.PRE, bank=bank))

    def xfer(cycle, op, bank, column=0):
        cmds.append(Command(cycle, op, bank=bank, column=column, payload=payload))

    if kind in ("idd0", "idd1"):
        pre_off = ras if kind == "idd0" else max(ras, rcd + BURST_CYCLES)
        period = max(rc, pre_off + rp)
        for i in range(iterations):
            base = i * period
            act(base, 0)
            if kind == "idd1":
                xfer(base + rcd, CommandKind.RD, 0)
            pre(base + pre_off, 0)
        cmds.append(Command(iterations * period, CommandKind.END))
    elif kind == "idd2n":
        cmds.append(Command(iterations * rc, CommandKind.END))
    elif kind == "idd3n":
        for b in range(8):
            act(b * _ACT_STAGGER, b)
        cmds.append(Command(7 * _ACT_STAGGER + iterations * rc, CommandKind.END))
    elif kind in ("idd4r", "idd4w"):
        op = CommandKind.RD if kind == "idd4r" else CommandKind.WR
        for b in range(8):
            act(b * _ACT_STAGGER, b)
        first = 7 * _ACT_STAGGER + rcd
        for k in range(8 * iterations):
            xfer(first + BURST_CYCLES * k, op, k % 8)
        cmds.append(
            Command(first + BURST_CYCLES * 8 * iterations, CommandKind.END)
        )
    elif kind == "idd5b":
        for i in range(iterations):
            cmds.append(Command(i * rfc, CommandKind.REF))
        cmds.append(Command(iterations * rfc, CommandKind.END))
    elif kind == "idd7":
        # Rotate {activate, read, precharge} across all eight banks.  The
        # precharge offset is nudged off the ACT/RD phase so no two commands
        # share a cycle.
        pre_off = max(ras, rcd + BURST_CYCLES)
        stagger = max(
            _ACT_STAGGER,
            -(-rc // 8),               # per-bank period 8*stagger >= tRC
            -(-(pre_off + rp) // 8),   # ... and >= pre_off + tRP
        )
        while pre_off % stagger in (0, rcd % stagger):
            pre_off += 1
        for i in range(iterations):
            base = i * 8 * stagger
            for b in range(8):
                act(base + stagger * b, b)
                xfer(base + stagger * b + rcd, CommandKind.RD, b)
                pre(base + stagger * b + pre_off, b)
        cmds.sort(key=lambda c: c.cycle)
        cmds.append(
            Command(cmds[-1].cycle + max(rp, BURST_CYCLES), CommandKind.END)
        )
    elif kind == "idd2p1":
        cmds.append(Command(0, CommandKind.PDE))
        cmds.append(Command(iterations * rc, CommandKind.PDX))
        cmds.append(Command(iterations * rc, CommandKind.END))
    return cmds
