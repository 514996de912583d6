"""Differentially private set intersection.

A two-party protocol where a sender and a receiver intersect hashed,
commutatively encrypted item sets; the receiver subsamples its input and the
sender randomizes the reported matches, so the output satisfies differential
privacy for both sides.  The package also ships the closed-form privacy
accountant, single-step analysis samplers backing the protocol's
distributional claims, a TCP transport, and a benchmarking CLI.
"""

from .accountant import (
    ReceiverBudget,
    SenderBudget,
    UtilityPrediction,
    intersection_lower_bound,
    optimal_pq,
    plan_report,
    predict_utility,
    receiver_epsilon,
    t_statistic,
    validate_region,
)
from .bench import BenchRecord, bench_sweep
from .errors import (
    DpPsiError,
    DuplicateItemError,
    FramingError,
    IntersectionTooSmallError,
    InvalidElementError,
    ParameterError,
    PhaseError,
    ProtocolAbort,
)
from .group import (
    ELEMENT_SIZE,
    Group,
    GroupElement,
    HashedItem,
    Ristretto255Group,
    Scalar,
    TinyGroup,
    make_group,
)
from .inputs import load_items, load_payloads, synthetic_pair, write_items
from .mechanisms import (
    MechanismParams,
    Permutation,
    bernoulli_subsample,
    uniform_permutation,
    upsample,
)
from .oracles import (
    EXACT_REGIME_LIMIT,
    OracleScenario,
    PmfTable,
    exact_pmf_alg1,
    exact_pmf_alg3,
    sample_alg1,
    sample_alg2,
    sample_alg3,
    sim_alg1,
    sim_alg2,
    sim_alg3,
    sim_alg4,
    sim_alg5,
    sim_alg6,
    tv_distance,
)
from .protocol import (
    DpIntersection,
    EncryptedSet,
    IndexSet,
    Phase,
    ReceiverSession,
    Role,
    RunStats,
    SenderSession,
    SessionState,
    baseline_dhpsi,
    receiver_finish,
    receiver_round1,
    receiver_round2,
    sender_round1,
    sender_round2,
    setup,
)
from .rng import RandomSource
from .transport import RunConfig, run_local, run_networked
from .wire import MessageKind, ProtocolMessage, transcript_bytes

__version__ = "0.1.0"

__all__ = [
    "BenchRecord",
    "DpIntersection",
    "DpPsiError",
    "DuplicateItemError",
    "ELEMENT_SIZE",
    "EXACT_REGIME_LIMIT",
    "EncryptedSet",
    "FramingError",
    "Group",
    "GroupElement",
    "HashedItem",
    "IndexSet",
    "IntersectionTooSmallError",
    "InvalidElementError",
    "MechanismParams",
    "MessageKind",
    "OracleScenario",
    "ParameterError",
    "Permutation",
    "Phase",
    "PhaseError",
    "PmfTable",
    "ProtocolAbort",
    "ProtocolMessage",
    "RandomSource",
    "ReceiverBudget",
    "ReceiverSession",
    "Ristretto255Group",
    "Role",
    "RunConfig",
    "RunStats",
    "Scalar",
    "SenderBudget",
    "SenderSession",
    "SessionState",
    "TinyGroup",
    "UtilityPrediction",
    "baseline_dhpsi",
    "bench_sweep",
    "bernoulli_subsample",
    "exact_pmf_alg1",
    "exact_pmf_alg3",
    "intersection_lower_bound",
    "load_items",
    "load_payloads",
    "make_group",
    "optimal_pq",
    "plan_report",
    "predict_utility",
    "receiver_epsilon",
    "receiver_finish",
    "receiver_round1",
    "receiver_round2",
    "run_local",
    "run_networked",
    "sample_alg1",
    "sample_alg2",
    "sample_alg3",
    "sender_round1",
    "sender_round2",
    "setup",
    "sim_alg1",
    "sim_alg2",
    "sim_alg3",
    "sim_alg4",
    "sim_alg5",
    "sim_alg6",
    "synthetic_pair",
    "t_statistic",
    "transcript_bytes",
    "tv_distance",
    "uniform_permutation",
    "upsample",
    "validate_region",
    "write_items",
]
