"""DRAM command trace parsing, serialization, and timing validation.

Trace format: one command per line, comma separated, `#` starts a comment.

    cycle,ACT,bank,row
    cycle,PRE,bank
    cycle,PREA
    cycle,RD,bank,column[,payload]
    cycle,WR,bank,column[,payload]
    cycle,REF
    cycle,PDE
    cycle,PDX
    cycle,END

Timestamps are DRAM clock cycles since trace start (not nanoseconds) and must
be non-decreasing.  The payload is the 64-byte line crossing the bus, written
as 128 hex digits (lowercase in canonical form).  The trace models a single
rank; there is no rank field.  An END line fixes the trace duration, which
otherwise ends at the last command.

Two parse modes exist: in ``payload`` mode every RD/WR line must carry a
payload; in ``distribution`` mode payloads are optional and never inspected
(the energy engine substitutes expected ones/toggle counts from a
:class:`DataDistribution`).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

from .errors import TraceParseError

PAYLOAD_BYTES = 64
PAYLOAD_BITS = PAYLOAD_BYTES * 8
NUM_BANKS = 8
MAX_ROW = 65535
MAX_COLUMN = 1023

PARSE_MODES = ("payload", "distribution")


class CommandKind(Enum):
    ACT = "ACT"
    PRE = "PRE"
    PREA = "PREA"
    RD = "RD"
    WR = "WR"
    REF = "REF"
    PDE = "PDE"
    PDX = "PDX"
    END = "END"


# Field requirements per kind: (bank, row, column)
_FIELDS = {
    CommandKind.ACT: (True, True, False),
    CommandKind.PRE: (True, False, False),
    CommandKind.PREA: (False, False, False),
    CommandKind.RD: (True, False, True),
    CommandKind.WR: (True, False, True),
    CommandKind.REF: (False, False, False),
    CommandKind.PDE: (False, False, False),
    CommandKind.PDX: (False, False, False),
    CommandKind.END: (False, False, False),
}


@dataclass(frozen=True)
class Command:
    """One timestamped DRAM command.

    ``payload`` is present only for RD/WR in payload-carrying traces and is
    always exactly 64 bytes.
    """

    cycle: int
    kind: CommandKind
    bank: Optional[int] = None
    row: Optional[int] = None
    column: Optional[int] = None
    payload: Optional[bytes] = None

    def __post_init__(self):
        need_bank, need_row, need_col = _FIELDS[self.kind]
        if (self.bank is not None) != need_bank:
            raise ValueError(f"{self.kind.value}: bank field mismatch")
        if (self.row is not None) != need_row:
            raise ValueError(f"{self.kind.value}: row field mismatch")
        if (self.column is not None) != need_col:
            raise ValueError(f"{self.kind.value}: column field mismatch")
        if self.payload is not None:
            if self.kind not in (CommandKind.RD, CommandKind.WR):
                raise ValueError(f"{self.kind.value}: payload not allowed")
            if len(self.payload) != PAYLOAD_BYTES:
                raise ValueError("payload must be exactly 64 bytes")
        if self.cycle < 0:
            raise ValueError("cycle must be non-negative")
        if self.bank is not None and not 0 <= self.bank < NUM_BANKS:
            raise ValueError(f"bank {self.bank} out of range 0..{NUM_BANKS - 1}")
        if self.row is not None and not 0 <= self.row <= MAX_ROW:
            raise ValueError(f"row {self.row} out of range")
        if self.column is not None and not 0 <= self.column <= MAX_COLUMN:
            raise ValueError(f"column {self.column} out of range")

    def is_transfer(self) -> bool:
        return self.kind in (CommandKind.RD, CommandKind.WR)


@dataclass(frozen=True)
class DataDistribution:
    """Expected data statistics for payload-free traces.

    ``ones_fraction`` is the expected fraction of ones per 512-bit line and
    ``toggle_fraction`` the expected fraction of bits toggled between
    consecutive transfers.
    """

    ones_fraction: float
    toggle_fraction: float

    def __post_init__(self):
        for name in ("ones_fraction", "toggle_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be within [0, 1], got {v}")

    @property
    def expected_ones(self) -> float:
        return self.ones_fraction * PAYLOAD_BITS

    @property
    def expected_toggles(self) -> float:
        return self.toggle_fraction * PAYLOAD_BITS


def _parse_int(text: str, what: str, line_no: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise TraceParseError(line_no, f"invalid {what} {text!r}") from None


def parse_trace(source: str | Iterable[str], mode: str = "payload") -> list[Command]:
    """Parse a trace from a string or an iterable of lines.

    Returns commands in file order.  Raises :class:`TraceParseError` with the
    offending line number on malformed input, unknown command kinds, payload
    problems, or decreasing cycle numbers.
    """
    if mode not in PARSE_MODES:
        raise ValueError(f"mode must be one of {PARSE_MODES}, got {mode!r}")
    lines = source.splitlines() if isinstance(source, str) else source

    commands: list[Command] = []
    last_cycle = None
    ended = False
    for line_no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ended:
            raise TraceParseError(line_no, "command after END")
        fields = [f.strip() for f in line.split(",")]
        if len(fields) < 2:
            raise TraceParseError(line_no, f"malformed line {line!r}")

        cycle = _parse_int(fields[0], "cycle", line_no)
        if cycle < 0:
            raise TraceParseError(line_no, f"negative cycle {cycle}")
        if last_cycle is not None and cycle < last_cycle:
            raise TraceParseError(
                line_no, f"decreasing cycle {cycle} after {last_cycle}"
            )
        try:
            kind = CommandKind(fields[1].upper())
        except ValueError:
            raise TraceParseError(
                line_no, f"unknown command kind {fields[1]!r}"
            ) from None

        args = fields[2:]
        bank = row = column = None
        payload = None
        if kind is CommandKind.ACT:
            if len(args) != 2:
                raise TraceParseError(line_no, "ACT takes bank,row")
            bank = _parse_int(args[0], "bank", line_no)
            row = _parse_int(args[1], "row", line_no)
        elif kind is CommandKind.PRE:
            if len(args) != 1:
                raise TraceParseError(line_no, "PRE takes bank")
            bank = _parse_int(args[0], "bank", line_no)
        elif kind in (CommandKind.RD, CommandKind.WR):
            if len(args) not in (2, 3):
                raise TraceParseError(
                    line_no, f"{kind.value} takes bank,column[,payload]"
                )
            bank = _parse_int(args[0], "bank", line_no)
            column = _parse_int(args[1], "column", line_no)
            if len(args) == 3:
                hexpart = args[2]
                if len(hexpart) != 2 * PAYLOAD_BYTES:
                    raise TraceParseError(
                        line_no,
                        f"payload must be {2 * PAYLOAD_BYTES} hex digits, "
                        f"got {len(hexpart)}",
                    )
                try:
                    payload = bytes.fromhex(hexpart)
                except ValueError:
                    raise TraceParseError(line_no, "invalid payload hex") from None
            elif mode == "payload":
                raise TraceParseError(line_no, f"missing payload at line {line_no}")
        else:
            if args:
                raise TraceParseError(line_no, f"{kind.value} takes no arguments")
            if kind is CommandKind.END:
                ended = True

        try:
            commands.append(
                Command(cycle=cycle, kind=kind, bank=bank, row=row,
                        column=column, payload=payload)
            )
        except ValueError as exc:
            raise TraceParseError(line_no, str(exc)) from None
        last_cycle = cycle
    return commands


def serialize_trace(commands: Iterable[Command]) -> str:
    """Render commands in canonical form (no comments, lowercase hex)."""
    out = []
    for cmd in commands:
        parts = [str(cmd.cycle), cmd.kind.value]
        if cmd.bank is not None:
            parts.append(str(cmd.bank))
        if cmd.row is not None:
            parts.append(str(cmd.row))
        if cmd.column is not None:
            parts.append(str(cmd.column))
        if cmd.payload is not None:
            parts.append(cmd.payload.hex())
        out.append(",".join(parts))
    return "\n".join(out) + ("\n" if out else "")


def trace_end_cycle(trace: list[Command]) -> int:
    """Trace duration in cycles: the END timestamp, else the last command's."""
    return trace[-1].cycle if trace else 0


@dataclass(frozen=True)
class TimingViolation:
    index: int          # position of the offending command in the trace
    cycle: int
    bank: Optional[int]
    rule: str           # tRCD / tRP / tRAS / tRC / tRFC / inactive-bank
    required_ns: float
    actual_ns: float

    def __str__(self):
        where = f"cycle {self.cycle}"
        if self.bank is not None:
            where += f" bank {self.bank}"
        if self.rule == "inactive-bank":
            return f"{where}: access to a bank without an activated row"
        return (
            f"{where}: {self.rule} violated "
            f"({self.actual_ns:g} ns < {self.required_ns:g} ns)"
        )


def validate_timing(trace: list[Command], timings) -> list[TimingViolation]:
    """Check inter-command spacing against the profile timing parameters.

    Verifies ACT->RD/WR >= tRCD, PRE->ACT >= tRP, ACT->PRE >= tRAS and
    ACT->ACT >= tRC per bank, REF->next command >= tRFC, and that RD/WR only
    target a bank with an open row.  PREA is treated as a precharge of every
    bank.  Violations are returned as data, never raised.
    """
    tck = timings.tck_ns
    eps = 1e-9
    violations: list[TimingViolation] = []
    last_act: list[Optional[int]] = [None] * NUM_BANKS
    last_pre: list[Optional[int]] = [None] * NUM_BANKS
    is_open = [False] * NUM_BANKS
    pending_ref: Optional[int] = None

    def check(index, cmd, bank, rule, required_ns, since_cycle):
        actual = (cmd.cycle - since_cycle) * tck
        if actual + eps < required_ns:
            violations.append(
                TimingViolation(index, cmd.cycle, bank, rule, required_ns, actual)
            )

    def do_precharge(index, cmd, bank):
        if is_open[bank] and last_act[bank] is not None:
            check(index, cmd, bank, "tRAS", timings.tras_ns, last_act[bank])
        last_pre[bank] = cmd.cycle
        is_open[bank] = False

    for index, cmd in enumerate(trace):
        if pending_ref is not None:
            check(index, cmd, None, "tRFC", timings.trfc_ns, pending_ref)
            pending_ref = None
        kind = cmd.kind
        if kind is CommandKind.ACT:
            b = cmd.bank
            if last_pre[b] is not None:
                check(index, cmd, b, "tRP", timings.trp_ns, last_pre[b])
            if last_act[b] is not None:
                check(index, cmd, b, "tRC", timings.trc_ns, last_act[b])
            last_act[b] = cmd.cycle
            is_open[b] = True
        elif kind is CommandKind.PRE:
            do_precharge(index, cmd, cmd.bank)
        elif kind is CommandKind.PREA:
            for b in range(NUM_BANKS):
                do_precharge(index, cmd, b)
        elif kind in (CommandKind.RD, CommandKind.WR):
            b = cmd.bank
            if not is_open[b]:
                violations.append(
                    TimingViolation(index, cmd.cycle, b, "inactive-bank", 0.0, 0.0)
                )
            elif last_act[b] is not None:
                check(index, cmd, b, "tRCD", timings.trcd_ns, last_act[b])
        elif kind is CommandKind.REF:
            pending_ref = cmd.cycle
    return violations
