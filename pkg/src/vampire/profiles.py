"""Vendor/part profiles: currents, timings, model tables, file I/O.

A profile bundles everything the engine needs for one DDR3L part: measured
and datasheet IDD currents, supply voltage, timing parameters, the
data-dependency parameter table, and the structural-variation tables.

Profiles live in YAML with explicit units in key names (``idd0`` entries are
mA, ``trcd_ns`` ns).  Any current entry may be written either as a bare
number or as ``{value: X, synthetic: true}``; the synthetic flag marks
calibration placeholders that are *not* backed by a measurement and should be
recalibrated before trusting absolute results.  The three shipped profiles
(vendor_a, vendor_b, vendor_c) keep the measured means and fitted model
parameters they were built from verbatim and flag everything else.

Datasheets publish IDD values only for their standard channel frequencies;
``extrapolate_idd`` fits the linear current-vs-frequency relationship (supply
voltage held fixed) to obtain values at other operating points such as
800 MT/s.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import yaml

from .datadep import DataDepParams, DataDepTable, Operation
from .dram_state import InterleaveClass
from .errors import DegenerateFit, MissingKey, ProfileError
from .variation import StructuralVariation, disabled_variation

IDD_KEYS = (
    "idd0", "idd1", "idd2n", "idd3n", "idd4r", "idd4w", "idd5b", "idd7", "idd2p1",
)

_CLASS_KEYS = {
    "no_interleave": InterleaveClass.NO_INTERLEAVE,
    "column_only": InterleaveClass.COLUMN_ONLY,
    "bank_only": InterleaveClass.BANK_ONLY,
    "bank_and_column": InterleaveClass.BANK_AND_COLUMN,
}
_CLASS_NAMES = {v: k for k, v in _CLASS_KEYS.items()}


@dataclass(frozen=True)
class TimingParams:
    """DRAM timing constraints in nanoseconds plus the clock period."""

    trcd_ns: float
    trp_ns: float
    tras_ns: float
    trc_ns: float
    trfc_ns: float
    tck_ns: float

    def cycles(self, duration_ns: float) -> int:
        """Smallest cycle count covering the given duration."""
        return math.ceil(duration_ns / self.tck_ns - 1e-12)

    def check(self) -> list[str]:
        problems = []
        for name in ("trcd_ns", "trp_ns", "tras_ns", "trc_ns", "trfc_ns", "tck_ns"):
            if getattr(self, name) <= 0:
                problems.append(f"{name} must be > 0")
        if self.trc_ns + 1e-9 < self.tras_ns + self.trp_ns:
            problems.append("trc_ns must be >= tras_ns + trp_ns")
        return problems


# Timings shared by all tested parts (DDR3L-1600 operated at 800 MT/s, so a
# 2.5 ns clock; tRFC is not part-specific data and defaults to 160 ns).
DEFAULT_TIMINGS = TimingParams(
    trcd_ns=13.75, trp_ns=13.75, tras_ns=35.0, trc_ns=48.75,
    trfc_ns=160.0, tck_ns=2.5,
)


@dataclass(frozen=True)
class VendorProfile:
    """Everything the energy engine needs for one vendor/part.

    ``synthetic`` holds dotted paths of entries that are placeholders rather
    than measurements (e.g. ``idd_measured_ma.idd2n``).
    """

    name: str
    vdd_v: float
    timings: TimingParams
    idd_measured_ma: dict[str, float]
    idd_datasheet_ma: dict[str, float]
    datadep: DataDepTable
    variation: StructuralVariation
    io_per_one_ma: Optional[float] = None
    synthetic: frozenset[str] = field(default_factory=frozenset)

    def idd(self, key: str, datasheet: bool = False) -> float:
        table = self.idd_datasheet_ma if datasheet else self.idd_measured_ma
        try:
            return table[key]
        except KeyError:
            which = "datasheet" if datasheet else "measured"
            raise MissingKey(f"{self.name}: no {which} value for {key}") from None

    def without_variation(self) -> "VendorProfile":
        return replace(self, variation=disabled_variation())


@dataclass(frozen=True)
class GuardbandRow:
    key: str
    measured_ma: float
    datasheet_ma: float
    ratio: float


def guardband_report(
    profile: VendorProfile, keys: Optional[Sequence[str]] = None
) -> list[GuardbandRow]:
    """Measured/datasheet current ratio per IDD key.

    With no explicit ``keys``, reports every key present in both maps, in
    canonical IDD order.  Requesting a key missing from either map raises
    :class:`MissingKey`.
    """
    if keys is None:
        keys = [
            k for k in IDD_KEYS
            if k in profile.idd_measured_ma and k in profile.idd_datasheet_ma
        ]
    rows = []
    for key in keys:
        measured = profile.idd(key)
        datasheet = profile.idd(key, datasheet=True)
        rows.append(GuardbandRow(key, measured, datasheet, measured / datasheet))
    return rows


def extrapolate_idd(
    points: Sequence[tuple[float, float]], target_mts: float
) -> tuple[float, float]:
    """Least-squares line through (frequency MT/s, current mA) points,
    evaluated at ``target_mts``.  Returns (current, R^2).

    Needs at least two distinct frequencies; otherwise raises
    :class:`DegenerateFit`.
    """
    data = np.asarray(points, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError("points must be (frequency, current) pairs")
    freqs = data[:, 0]
    if len(data) < 2 or np.all(freqs == freqs[0]):
        raise DegenerateFit("need at least two distinct frequencies")
    design = np.column_stack([np.ones(len(data)), freqs])
    coef, _, _, _ = np.linalg.lstsq(design, data[:, 1], rcond=None)
    fitted = design @ coef
    ss_res = float(np.sum((data[:, 1] - fitted) ** 2))
    ss_tot = float(np.sum((data[:, 1] - np.mean(data[:, 1])) ** 2))
    r2 = 1.0 if ss_tot == 0.0 and ss_res < 1e-18 else 1.0 - ss_res / max(ss_tot, 1e-300)
    return float(coef[0] + coef[1] * target_mts), min(1.0, max(0.0, r2))


def lint_profile(profile: VendorProfile) -> list[str]:
    """All invariant violations in the profile; empty means clean."""
    problems = []
    if profile.vdd_v <= 0:
        problems.append("vdd_v must be > 0")
    problems += profile.timings.check()
    for map_name, table in (
        ("idd_measured_ma", profile.idd_measured_ma),
        ("idd_datasheet_ma", profile.idd_datasheet_ma),
    ):
        for key, value in table.items():
            if key not in IDD_KEYS:
                problems.append(f"{map_name}: unknown key {key!r}")
            elif value <= 0:
                problems.append(f"{map_name}.{key} must be > 0")
        if "idd2n" in table and "idd3n" in table and table["idd3n"] < table["idd2n"]:
            problems.append(f"{map_name}: idd3n must be >= idd2n")
    problems += profile.datadep.check_signs()
    problems += profile.variation.check()
    if profile.io_per_one_ma is not None and profile.io_per_one_ma < 0:
        problems.append("io_per_one_ma must be >= 0")
    return problems


# ---------------------------------------------------------------------------
# YAML serialization
# ---------------------------------------------------------------------------

def _load_value(node, path: str, synthetic: set[str]) -> float:
    if isinstance(node, dict):
        if "value" not in node:
            raise ProfileError(f"{path}: mapping entry needs a 'value' key")
        if node.get("synthetic"):
            synthetic.add(path)
        node = node["value"]
    if not isinstance(node, (int, float)) or isinstance(node, bool):
        raise ProfileError(f"{path}: expected a number, got {node!r}")
    return float(node)


def _load_list(node, path: str, synthetic: set[str]) -> tuple[float, ...]:
    if isinstance(node, dict):
        if node.get("synthetic"):
            synthetic.add(path)
        node = node.get("values")
    if not isinstance(node, list):
        raise ProfileError(f"{path}: expected a list of numbers")
    return tuple(float(v) for v in node)


def load_profile_text(text: str) -> VendorProfile:
    """Parse a profile from YAML text."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ProfileError(f"invalid YAML: {exc}") from None
    if not isinstance(doc, dict):
        raise ProfileError("profile must be a YAML mapping")
    synthetic: set[str] = set()
    try:
        name = str(doc["name"])
        vdd = float(doc["vdd_v"])
        t = doc["timings"]
        timings = TimingParams(
            trcd_ns=float(t["trcd_ns"]), trp_ns=float(t["trp_ns"]),
            tras_ns=float(t["tras_ns"]), trc_ns=float(t["trc_ns"]),
            trfc_ns=float(t["trfc_ns"]), tck_ns=float(t["tck_ns"]),
        )
        measured = {
            k: _load_value(v, f"idd_measured_ma.{k}", synthetic)
            for k, v in doc.get("idd_measured_ma", {}).items()
        }
        datasheet = {
            k: _load_value(v, f"idd_datasheet_ma.{k}", synthetic)
            for k, v in doc.get("idd_datasheet_ma", {}).items()
        }
        dd = doc["datadep_ma"]
        params = {}
        for op in Operation:
            for key, klass in _CLASS_KEYS.items():
                node = dd[op.value][key]
                params[(op, klass)] = DataDepParams(
                    i_zero_ma=float(node["i_zero"]),
                    d_one_ma=float(node["d_one"]),
                    d_toggle_ma=float(node["d_toggle"]),
                )
        var = doc["variation"]
        variation = StructuralVariation(
            bank_idle_factor=_load_list(
                var["bank_idle_factor"], "variation.bank_idle_factor", synthetic),
            bank_read_factor=_load_list(
                var["bank_read_factor"], "variation.bank_read_factor", synthetic),
            row_ones_slope=_load_value(
                var["row_ones_slope"], "variation.row_ones_slope", synthetic),
        )
        io = doc.get("io_per_one_ma")
        io_per_one = None if io is None else float(io)
    except (KeyError, TypeError, ValueError) as exc:
        raise ProfileError(f"malformed profile: {exc!r}") from None
    return VendorProfile(
        name=name, vdd_v=vdd, timings=timings,
        idd_measured_ma=measured, idd_datasheet_ma=datasheet,
        datadep=DataDepTable(params), variation=variation,
        io_per_one_ma=io_per_one, synthetic=frozenset(synthetic),
    )


def _dump_value(value: float, path: str, synthetic: frozenset[str]):
    if path in synthetic:
        return {"value": value, "synthetic": True}
    return value


def save_profile(profile: VendorProfile) -> str:
    """Render a profile as YAML; ``load_profile_text`` round-trips it."""
    syn = profile.synthetic
    t = profile.timings
    doc = {
        "name": profile.name,
        "vdd_v": profile.vdd_v,
        "timings": {
            "trcd_ns": t.trcd_ns, "trp_ns": t.trp_ns, "tras_ns": t.tras_ns,
            "trc_ns": t.trc_ns, "trfc_ns": t.trfc_ns, "tck_ns": t.tck_ns,
        },
        "idd_measured_ma": {
            k: _dump_value(v, f"idd_measured_ma.{k}", syn)
            for k, v in _ordered_idd(profile.idd_measured_ma)
        },
        "idd_datasheet_ma": {
            k: _dump_value(v, f"idd_datasheet_ma.{k}", syn)
            for k, v in _ordered_idd(profile.idd_datasheet_ma)
        },
        "datadep_ma": {
            op.value: {
                _CLASS_NAMES[klass]: {
                    "i_zero": p.i_zero_ma, "d_one": p.d_one_ma,
                    "d_toggle": p.d_toggle_ma,
                }
                for klass in InterleaveClass
                for p in [profile.datadep.get(op, klass)]
            }
            for op in Operation
        },
        "variation": {
            "bank_idle_factor": _dump_list(
                profile.variation.bank_idle_factor,
                "variation.bank_idle_factor", syn),
            "bank_read_factor": _dump_list(
                profile.variation.bank_read_factor,
                "variation.bank_read_factor", syn),
            "row_ones_slope": _dump_value(
                profile.variation.row_ones_slope,
                "variation.row_ones_slope", syn),
        },
        "io_per_one_ma": profile.io_per_one_ma,
    }
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=False)


def _dump_list(values: tuple[float, ...], path: str, synthetic: frozenset[str]):
    if path in synthetic:
        return {"values": list(values), "synthetic": True}
    return list(values)


def _ordered_idd(table: dict[str, float]):
    known = [(k, table[k]) for k in IDD_KEYS if k in table]
    extra = sorted((k, v) for k, v in table.items() if k not in IDD_KEYS)
    return known + extra


def load_profile(path: str | Path) -> VendorProfile:
    """Load a profile from a YAML file; errors name the offending file."""
    try:
        return load_profile_text(Path(path).read_text())
    except ProfileError as exc:
        raise ProfileError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# Shipped profiles
# ---------------------------------------------------------------------------

def builtin_profile_names() -> list[str]:
    files = resources.files("vampire").joinpath("profiles_data")
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".yaml"))


def builtin_profile(name: str) -> VendorProfile:
    """Load one of the shipped profiles (vendor_a, vendor_b, vendor_c)."""
    ref = resources.files("vampire").joinpath(f"profiles_data/{name}.yaml")
    if not ref.is_file():
        raise ProfileError(
            f"no builtin profile {name!r}; available: {builtin_profile_names()}"
        )
    return load_profile_text(ref.read_text())


def resolve_profile(spec: str, profile_dir: Optional[str] = None) -> VendorProfile:
    """Resolve a --profile argument: explicit path, then $VAMPIRE_PROFILE_DIR,
    then the shipped profiles by name."""
    path = Path(spec)
    if path.is_file():
        return load_profile(path)
    directory = profile_dir or os.environ.get("VAMPIRE_PROFILE_DIR")
    if directory:
        for candidate in (Path(directory) / spec, Path(directory) / f"{spec}.yaml"):
            if candidate.is_file():
                return load_profile(candidate)
    name = spec[:-5] if spec.endswith(".yaml") else spec
    try:
        return builtin_profile(name)
    except ProfileError:
        raise ProfileError(
            f"cannot resolve profile {spec!r}: not a file, not under "
            f"VAMPIRE_PROFILE_DIR, and not a builtin"
        ) from None
