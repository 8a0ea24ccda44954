"""Classification pipeline for recurring unemployment spell records.

Feature coding and standardization, Kohonen-map training, Ward
macro-clustering, transition tables, class profiles and multiple
correspondence analysis, driven by a seeded synthetic cohort or a
delimited registry extract.
"""

__version__ = "0.1.0"

from .dataset import (  # noqa: F401
    FEATURE_VARIABLES, QUALITATIVE_VARIABLES, CodedDataset, CodingSpec,
    IngestResult, SpellRecord, SyntheticCohort, SyntheticSpec,
    build_feature_matrix, default_coding_spec, default_synthetic_spec,
    discretize, generate_synthetic, ingest, latest_spells, standardize,
    unstandardize,
)
from .errors import (  # noqa: F401
    ConfigError, MissingStageError, MissingValueError, RowError, SchemaError,
    SpellsomError, ZeroVarianceError,
)
from .macrocluster import (  # noqa: F401
    ContiguityEntry, Dendrogram, MacroPartition, contiguity_report, cut, ward,
)
from .mca import (  # noqa: F401
    IndicatorMatrix, McaResult, fit_mca, indicator, modality_coordinates,
)
from .profiles import (  # noqa: F401
    ClassProfile, NeighborDistanceField, QualDistribution, class_profiles,
    codevector_profile, neighbor_distances, qualitative_distribution,
)
from .som import (  # noqa: F401
    GridTopology, SomMap, TrainingSchedule, assign, bmu, init_map, load_map,
    neighborhood_weight, quantization_error, save_map, topographic_error,
    train,
)
from .transitions import (  # noqa: F401
    EXIT_TO_REGISTRATION, REGISTRATION_TO_EXIT, RssIndicators,
    TransitionPair, TransitionTable, build_table, derive_pairs,
    merge_tables, rss_by_individual, rss_indicators, significant_cells,
)
