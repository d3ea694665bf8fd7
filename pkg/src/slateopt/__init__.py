"""slateopt: multi-slot ad auction simulation and trade-off optimization.

Selects joint ad placements across a webpage's slots by scoring candidate
assignments with six stakeholder metrics (publisher revenue, advertiser
utility, ad memorability, CTR, contextual relevance, visual saliency),
filters out placements that pair competing advertisers, and learns
constrained trade-off weights that bound the publisher's revenue loss
while improving the other metrics.
"""

from .errors import (
    BudgetExceeded,
    DanglingReference,
    DegenerateImage,
    DuplicateAdvertiserInSlot,
    EmptyCorpus,
    EmptySlotBids,
    EmptyTraining,
    ImageLoadError,
    InvalidSpec,
    MissingMetricEntry,
    ParseError,
    SlateoptError,
    SlotMismatch,
    SlotOutOfBounds,
    TooFewDistinctVectors,
    TooFewRequests,
    UnclusteredAd,
    UnknownAdvertiser,
    UnsupportedFormat,
    ValidationError,
)
from .metrics import (
    Extrema,
    MetricContext,
    build_metric_context,
    column_extrema,
    compute_metric_vector,
    gsp_payment,
    normalize,
)
from .model import (
    Ad,
    AdSlot,
    AuctionRequest,
    BidEntry,
    CandidateRow,
    ChangeReport,
    GrayImage,
    METRIC_NAMES,
    MetricVector,
    N_METRICS,
    Rect,
    SelectionResult,
    ThresholdVector,
    Webpage,
    WeightVector,
    validate_request,
)
from .saliency import (
    SaliencyMap,
    composite,
    mbd_transform,
    read_pgm,
    slot_saliency,
    to_saliency,
    write_pgm,
)
from .selection import (
    EnumerationBudget,
    baseline_selection,
    enumerate_rows,
    filter_competitive,
    omega_size,
    rank_score,
    select_optimal,
)
from .text import (
    CompetitorRelation,
    SparseVector,
    TopicAssignment,
    TopicClusterer,
    Vocabulary,
    build_competitor_relation,
    build_vocabulary,
    cosine_similarity,
    kmeans_cluster,
    tfidf_vector,
    tokenize,
)
from .weights import (
    TradeoffAdSelector,
    TrainingExample,
    WeightSearchConfig,
    build_training_example,
    enumerate_simplex,
    evaluate_gamma,
    grid_search_weights,
    xi_changes,
)

__version__ = "0.1.0"
