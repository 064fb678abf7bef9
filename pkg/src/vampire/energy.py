"""Trace-driven energy engine.

Integrates current x voltage x time over a replayed command trace.  Energy
per interval is I(mA) * V * t(ns) * 1e-3, in nJ.  The accounting follows the
classic background/add-on split:

* Background runs for the whole trace: the precharged standby current while
  no bank has an open row, the active standby current (scaled by the mean
  idle factor of the open banks) while at least one does, and the fast
  power-down current between PDE and PDX.  A bank counts as active from ACT
  issue until the closing PRE is issued.

* Each ACT is charged the add-on energy of a full activate/precharge cycle,
  (idd0 - (idd3n*tRAS + idd2n*(tRC-tRAS))/tRC) * V * tRC, scaled by the
  row-address factor.  Charging the pair at the ACT keeps command counts and
  energy consistent even when a trace ends with rows open.

* Each RD/WR burst occupies 4 clock cycles and adds
  (I_data - idd3n) * V * 4*tCK on top of the active background, where I_data
  comes from the data-dependency table for the transfer's interleave class.
  Reads are scaled by the per-bank read factor; writes are not.  When the
  profile carries ``io_per_one_ma``, the read add-on is additionally split
  into I/O-driver and core components (the total is unchanged).

* Each REF adds (idd5b - idd2n) * V * tRFC.

Payload-free traces need a :class:`DataDistribution`; expected fractional
ones/toggle counts then replace the per-payload counts (the first transfer
still counts zero toggles, matching the payload path).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .datadep import Operation, eval_current
from .dram_state import CommandKind, ModuleState, PowerMode
from .errors import TimingViolationError, VampireError
from .profiles import VendorProfile
from .trace import Command, DataDistribution, trace_end_cycle, validate_timing
from .variation import BankContext, bank_factor, disabled_variation, row_factor

BURST_CYCLES = 4  # burst length 8 at one transfer per clock edge

_CATEGORIES = (
    "act_pre", "read", "write", "refresh",
    "background_active", "background_precharged", "power_down",
)


@dataclass(frozen=True)
class EngineOptions:
    """Knobs for one engine run.

    ``force`` skips the timing-validation gate; ``no_variation`` zeroes the
    structural-variation feature; ``interpolate_background`` scales the
    active standby current with the open-bank count instead of charging the
    all-banks value whenever any bank is open; ``distribution`` supplies
    expected data statistics for payload-free traces.
    """

    force: bool = False
    no_variation: bool = False
    interpolate_background: bool = False
    distribution: Optional[DataDistribution] = None


@dataclass(frozen=True)
class EnergyBreakdown:
    """Per-category energy totals in nJ plus the per-command ledger."""

    act_pre_nj: float = 0.0
    read_nj: float = 0.0
    write_nj: float = 0.0
    refresh_nj: float = 0.0
    background_active_nj: float = 0.0
    background_precharged_nj: float = 0.0
    power_down_nj: float = 0.0
    read_io_nj: Optional[float] = None
    per_command: tuple[tuple[int, str, float], ...] = ()

    @property
    def total_nj(self) -> float:
        return (
            self.act_pre_nj + self.read_nj + self.write_nj + self.refresh_nj
            + self.background_active_nj + self.background_precharged_nj
            + self.power_down_nj
        )

    @property
    def read_core_nj(self) -> Optional[float]:
        if self.read_io_nj is None:
            return None
        return self.read_nj - self.read_io_nj

    def categories(self) -> list[tuple[str, float]]:
        """(name, value) rows in the fixed, documented CSV order."""
        rows = [("act_pre", self.act_pre_nj), ("read", self.read_nj)]
        if self.read_io_nj is not None:
            rows.append(("read_core", self.read_core_nj))
            rows.append(("read_io", self.read_io_nj))
        rows += [
            ("write", self.write_nj),
            ("refresh", self.refresh_nj),
            ("background_active", self.background_active_nj),
            ("background_precharged", self.background_precharged_nj),
            ("power_down", self.power_down_nj),
            ("total", self.total_nj),
        ]
        return rows

@dataclass
class _Accumulator:
    act_pre: float = 0.0
    read: float = 0.0
    write: float = 0.0
    refresh: float = 0.0
    bg_active: float = 0.0
    bg_precharged: float = 0.0
    power_down: float = 0.0
    read_io: float = 0.0
    ledger: list = field(default_factory=list)


def compute_energy(
    trace: list[Command],
    profile: VendorProfile,
    options: Optional[EngineOptions] = None,
) -> EnergyBreakdown:
    """Replay a trace and integrate its energy under the given profile.

    The trace must pass :func:`validate_timing` unless ``options.force`` is
    set; protocol violations (RD to a closed bank, ...) always raise.  The
    result is deterministic: identical inputs give bit-identical breakdowns.
    """
    opts = options or EngineOptions()
    timings = profile.timings
    if not opts.force:
        violations = validate_timing(trace, timings)
        if violations:
            raise TimingViolationError(violations)

    vdd = profile.vdd_v
    tck = timings.tck_ns
    burst_ns = BURST_CYCLES * tck
    idd2n = profile.idd("idd2n")
    idd3n = profile.idd("idd3n")
    idd0 = profile.idd("idd0")
    idd5b = profile.idd("idd5b")
    idd2p1 = profile.idd("idd2p1")
    variation = disabled_variation() if opts.no_variation else profile.variation
    dist = opts.distribution

    # Add-on current of one full activate/precharge cycle over tRC, with the
    # standby mix it displaces subtracted out.
    bg_mix = (idd3n * timings.tras_ns
              + idd2n * (timings.trc_ns - timings.tras_ns)) / timings.trc_ns
    pair_addon_ma = idd0 - bg_mix

    acc = _Accumulator()
    state = ModuleState()
    end_cycle = trace_end_cycle(trace)
    seg_start = 0
    seen_transfer = False

    def accrue_background(until_cycle: int):
        nonlocal seg_start
        dt_ns = (until_cycle - seg_start) * tck
        seg_start = until_cycle
        if dt_ns <= 0:
            return
        if state.power_mode is PowerMode.FAST_POWER_DOWN:
            acc.power_down += idd2p1 * vdd * dt_ns * 1e-3
            return
        active = state.active_banks()
        if not active:
            acc.bg_precharged += idd2n * vdd * dt_ns * 1e-3
            return
        mean_factor = sum(
            bank_factor(variation, b, BankContext.IDLE) for b in active
        ) / len(active)
        if opts.interpolate_background:
            current = idd2n + (idd3n - idd2n) * len(active) / len(state.banks)
        else:
            current = idd3n
        acc.bg_active += current * mean_factor * vdd * dt_ns * 1e-3

    for cmd in trace:
        accrue_background(cmd.cycle)
        event = state.apply(cmd)
        energy = 0.0
        if cmd.kind is CommandKind.ACT:
            energy = (pair_addon_ma * vdd * timings.trc_ns * 1e-3
                      * row_factor(variation, cmd.row))
            acc.act_pre += energy
        elif cmd.kind in (CommandKind.RD, CommandKind.WR):
            if dist is not None:
                ones = dist.expected_ones
                toggles = 0.0 if not seen_transfer else dist.expected_toggles
            else:
                if event.n_ones is None or event.n_toggles is None:
                    raise VampireError(
                        f"cycle {cmd.cycle}: payload-free transfer; analyze "
                        "this trace in distribution mode"
                    )
                ones = event.n_ones
                toggles = event.n_toggles
            seen_transfer = True
            if cmd.kind is CommandKind.RD:
                params = profile.datadep.get(Operation.READ, event.interleave)
                factor = bank_factor(variation, cmd.bank, BankContext.READ)
                energy = ((eval_current(params, ones, toggles) - idd3n)
                          * vdd * burst_ns * factor * 1e-3)
                acc.read += energy
                if profile.io_per_one_ma is not None:
                    acc.read_io += (profile.io_per_one_ma * ones
                                    * vdd * burst_ns * factor * 1e-3)
            else:
                params = profile.datadep.get(Operation.WRITE, event.interleave)
                energy = ((eval_current(params, ones, toggles) - idd3n)
                          * vdd * burst_ns * 1e-3)
                acc.write += energy
        elif cmd.kind is CommandKind.REF:
            energy = (idd5b - idd2n) * vdd * timings.trfc_ns * 1e-3
            acc.refresh += energy
        acc.ledger.append((cmd.cycle, cmd.kind.value, energy))

    accrue_background(end_cycle)

    return EnergyBreakdown(
        act_pre_nj=acc.act_pre,
        read_nj=acc.read,
        write_nj=acc.write,
        refresh_nj=acc.refresh,
        background_active_nj=acc.bg_active,
        background_precharged_nj=acc.bg_precharged,
        power_down_nj=acc.power_down,
        read_io_nj=acc.read_io if profile.io_per_one_ma is not None else None,
        per_command=tuple(acc.ledger),
    )


def compute_power(breakdown: EnergyBreakdown, duration_ns: float) -> float:
    """Average power in mW over the given duration."""
    if duration_ns <= 0:
        raise ValueError(f"duration must be > 0, got {duration_ns}")
    return breakdown.total_nj / duration_ns * 1e3


def trace_duration_ns(trace: list[Command], timings) -> float:
    return trace_end_cycle(trace) * timings.tck_ns
