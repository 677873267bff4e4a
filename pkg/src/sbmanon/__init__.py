"""Privacy analysis of anonymized graphs drawn from correlated stochastic block models."""
from ._accel import backend
from .attacks import (
    AttackResult,
    MapConstants,
    MapScore,
    PgmParams,
    automorphism_confusion,
    brute_force_map,
    evaluate_attack,
    map_attack,
    map_constants,
    map_log_score,
    pgm_attack,
    random_seed_pairs,
)
from .community import detect_communities, jaccard, label_agreement, match_communities, modularity
from .errors import (
    CapacityError,
    ConfigError,
    FormatVersionError,
    InfeasibleError,
    ParameterError,
    ParseError,
    SbmAnonError,
)
from .experiments import ExperimentConfig, replay, run_experiment
from .graph import CommunityLabeling, Graph, symmetric_edge_difference
from .records import RunRecord, read_run_record, write_run_record
from .synth import (
    CorrelatedPair,
    SampleParams,
    SbmParams,
    anonymize,
    rewire_edges,
    sample_correlated_pair,
    sample_sbm,
    subsample_edges,
)
from .theory import (
    RegionQuery,
    certify_anonymity,
    offset_delta,
    safe_region_query,
    subsample_window,
)

__version__ = "0.1.0"
