"""Trace-driven, data-dependent DRAM power and energy modeling toolkit."""

from .baselines import (
    ModelKind,
    compute_baseline,
    generate_idd_loop,
    mape,
    relative_error_pct,
)
from .datadep import (
    DataDepParams,
    DataDepTable,
    Operation,
    eval_current,
    fit_params,
    model_percent_error,
)
from .dram_state import (
    BankState,
    BankStatus,
    InterleaveClass,
    ModuleState,
    PowerMode,
    StateEvent,
    apply_command,
    classify_interleave,
    count_ones,
    count_toggles,
    replay,
)
from .encoding import (
    ByteCodebook,
    EncodedLine,
    Scheme,
    bdi_compress,
    bdi_decompress,
    build_codebook,
    decode_line,
    encode_line,
    run_encoding_study,
)
from .energy import (
    BURST_CYCLES,
    EnergyBreakdown,
    EngineOptions,
    compute_energy,
    compute_power,
    trace_duration_ns,
)
from .errors import (
    DegenerateFit,
    IllegalCommand,
    LengthMismatch,
    MissingKey,
    NonPositiveActual,
    NoPayloads,
    ProfileError,
    RankDeficient,
    TimingViolationError,
    TraceParseError,
    VampireError,
)
from .profiles import (
    DEFAULT_TIMINGS,
    IDD_KEYS,
    TimingParams,
    VendorProfile,
    builtin_profile,
    builtin_profile_names,
    extrapolate_idd,
    guardband_report,
    lint_profile,
    load_profile,
    load_profile_text,
    resolve_profile,
    save_profile,
)
from .trace import (
    Command,
    CommandKind,
    DataDistribution,
    TimingViolation,
    parse_trace,
    serialize_trace,
    trace_end_cycle,
    validate_timing,
)
from .variation import (
    BankContext,
    StructuralVariation,
    bank_factor,
    disabled_variation,
    row_factor,
)

__version__ = "0.1.0"
