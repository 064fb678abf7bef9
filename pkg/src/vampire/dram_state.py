"""Per-bank state machine for trace replay.

Replays a command stream at command granularity: transitions take effect at
the command's cycle, and spacing rules (tRCD, tRP, ...) are the timing
validator's job, not this module's.  The replay tracks open rows, the
power-down interval, each bank's last accessed column, and the most recent
transferred payload anywhere on the module, which is the toggle baseline for
the next RD/WR (reads and writes share the peripheral bus, so the baseline
crosses command kinds).

The first transfer of a trace has no prior state: it counts zero toggles and
classifies as NoInterleave.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .errors import IllegalCommand
from .trace import Command, CommandKind, NUM_BANKS


class BankStatus(Enum):
    PRECHARGED = "precharged"
    ACTIVATING = "activating"    # reserved for cycle-granular views
    ACTIVE = "active"
    PRECHARGING = "precharging"  # reserved for cycle-granular views


class PowerMode(Enum):
    NORMAL = "normal"
    FAST_POWER_DOWN = "fast_power_down"


class InterleaveClass(Enum):
    """Relationship between consecutive transfers; selects the switching
    circuitry that toggles and therefore the data-dependency parameter set."""

    NO_INTERLEAVE = "no_interleave"
    COLUMN_ONLY = "column_only"
    BANK_ONLY = "bank_only"
    BANK_AND_COLUMN = "bank_and_column"


def count_ones(payload: bytes) -> int:
    """Population count over the 512 bits of a cache line."""
    return int.from_bytes(payload, "big").bit_count()


def count_toggles(prev_payload: bytes, cur_payload: bytes) -> int:
    """Hamming distance between two consecutive 512-bit transfers."""
    a = int.from_bytes(prev_payload, "big")
    b = int.from_bytes(cur_payload, "big")
    return (a ^ b).bit_count()


def classify_interleave(
    prev_xfer: Optional[tuple[int, int]],
    target_bank_last_column: Optional[int],
    bank: int,
    column: int,
) -> InterleaveClass:
    """Classify a transfer against the previous one.

    ``prev_xfer`` is the (bank, column) of the most recent RD/WR on the
    module, or None for the first transfer.  ``target_bank_last_column`` is
    the last column accessed in the *target* bank (None if that bank has no
    access history).  Same bank and column -> NoInterleave; same bank,
    different column -> ColumnOnly; different bank -> BankOnly when the column
    matches the target bank's last driven column (or there is no history),
    BankAndColumn otherwise.
    """
    if prev_xfer is None:
        return InterleaveClass.NO_INTERLEAVE
    prev_bank, prev_column = prev_xfer
    if bank == prev_bank:
        if column == prev_column:
            return InterleaveClass.NO_INTERLEAVE
        return InterleaveClass.COLUMN_ONLY
    if target_bank_last_column is None or column == target_bank_last_column:
        return InterleaveClass.BANK_ONLY
    return InterleaveClass.BANK_AND_COLUMN


@dataclass
class BankState:
    """State of one bank.  ``last_column`` persists across precharges (the
    select logic holds its last driven value)."""

    status: BankStatus = BankStatus.PRECHARGED
    open_row: Optional[int] = None
    last_column: Optional[int] = None


@dataclass(frozen=True)
class StateEvent:
    """Replay record consumed by the energy engine.

    ``n_ones``/``n_toggles`` are None when the command carried no payload
    (distribution-mode traces).
    """

    cycle: int
    kind: CommandKind
    bank: Optional[int] = None
    row: Optional[int] = None
    column: Optional[int] = None
    interleave: Optional[InterleaveClass] = None
    n_ones: Optional[int] = None
    n_toggles: Optional[int] = None


@dataclass
class ModuleState:
    """Rank-wide module state: eight banks plus power mode and the most
    recent transfer (bank, column, payload)."""

    banks: list[BankState] = field(
        default_factory=lambda: [BankState() for _ in range(NUM_BANKS)]
    )
    power_mode: PowerMode = PowerMode.NORMAL
    last_xfer: Optional[tuple[int, int, Optional[bytes]]] = None

    def active_banks(self) -> list[int]:
        return [b for b in range(NUM_BANKS) if self.banks[b].open_row is not None]

    def classify(self, cmd: Command) -> InterleaveClass:
        prev = None if self.last_xfer is None else self.last_xfer[:2]
        return classify_interleave(
            prev, self.banks[cmd.bank].last_column, cmd.bank, cmd.column
        )

    def apply(self, cmd: Command) -> StateEvent:
        """Apply one command, returning the event record.

        Raises :class:`IllegalCommand` for protocol violations: RD/WR to a
        bank without an open row, ACT to a bank with an open row, REF while
        any row is open, PDE outside normal mode, PDX outside power-down, or
        anything but PDX/END while powered down.
        """
        kind = cmd.kind
        if self.power_mode is PowerMode.FAST_POWER_DOWN and kind not in (
            CommandKind.PDX,
            CommandKind.END,
        ):
            raise IllegalCommand(
                cmd.cycle, f"{kind.value} during fast power-down", cmd.bank
            )

        if kind is CommandKind.ACT:
            bank = self.banks[cmd.bank]
            if bank.open_row is not None:
                raise IllegalCommand(
                    cmd.cycle,
                    f"ACT to a bank with open row {bank.open_row}",
                    cmd.bank,
                )
            bank.open_row = cmd.row
            bank.status = BankStatus.ACTIVE
            return StateEvent(cmd.cycle, kind, bank=cmd.bank, row=cmd.row)

        if kind is CommandKind.PRE:
            self._precharge(cmd.bank)
            return StateEvent(cmd.cycle, kind, bank=cmd.bank)

        if kind is CommandKind.PREA:
            for b in range(NUM_BANKS):
                self._precharge(b)
            return StateEvent(cmd.cycle, kind)

        if kind in (CommandKind.RD, CommandKind.WR):
            bank = self.banks[cmd.bank]
            if bank.open_row is None:
                raise IllegalCommand(
                    cmd.cycle, f"{kind.value} to a precharged bank", cmd.bank
                )
            klass = self.classify(cmd)
            n_ones = None
            n_toggles = None
            if cmd.payload is not None:
                n_ones = count_ones(cmd.payload)
                if self.last_xfer is None:
                    n_toggles = 0
                elif self.last_xfer[2] is not None:
                    n_toggles = count_toggles(self.last_xfer[2], cmd.payload)
            bank.last_column = cmd.column
            self.last_xfer = (cmd.bank, cmd.column, cmd.payload)
            return StateEvent(
                cmd.cycle,
                kind,
                bank=cmd.bank,
                column=cmd.column,
                interleave=klass,
                n_ones=n_ones,
                n_toggles=n_toggles,
            )

        if kind is CommandKind.REF:
            open_banks = self.active_banks()
            if open_banks:
                raise IllegalCommand(
                    cmd.cycle, f"REF with open rows in banks {open_banks}"
                )
            return StateEvent(cmd.cycle, kind)

        if kind is CommandKind.PDE:
            if self.power_mode is not PowerMode.NORMAL:
                raise IllegalCommand(cmd.cycle, "PDE while already powered down")
            self.power_mode = PowerMode.FAST_POWER_DOWN
            return StateEvent(cmd.cycle, kind)

        if kind is CommandKind.PDX:
            if self.power_mode is not PowerMode.FAST_POWER_DOWN:
                raise IllegalCommand(cmd.cycle, "PDX outside power-down")
            self.power_mode = PowerMode.NORMAL
            return StateEvent(cmd.cycle, kind)

        return StateEvent(cmd.cycle, kind)  # END

    def _precharge(self, bank_idx: int):
        # Precharging an already-closed bank is a harmless no-op.
        bank = self.banks[bank_idx]
        bank.open_row = None
        bank.status = BankStatus.PRECHARGED


def apply_command(state: ModuleState, cmd: Command) -> tuple[ModuleState, StateEvent]:
    """Functional-style wrapper around :meth:`ModuleState.apply`."""
    event = state.apply(cmd)
    return state, event


def replay(trace: list[Command]) -> list[StateEvent]:
    """Replay a full trace through a fresh module, returning all events."""
    state = ModuleState()
    return [state.apply(cmd) for cmd in trace]
