"""Dense preferential attachment graphs, their W-random counterparts, and the
couplings and norm computations used to compare them."""
from .couplings import (
    CoupledRealization,
    SplitPair,
    build_chain,
    chain_violations,
    maximal_categorical_coupling,
    poisson_splitting,
    split_given_second,
)
from .distance import (
    DistanceReport,
    beta_exponent,
    beta_optimum,
    cut_exact,
    distance_report,
    global_stats,
    jumble_exact,
    jumble_naive,
    jumble_rowsum_bound,
    rowsum_diff,
)
from .errors import CapExceededError, InsufficientDataError, InvalidParameterError
from .models import (
    LatentState,
    ModelParams,
    gen_model1,
    gen_model2,
    gen_model3,
    gen_model4,
    gen_model5,
    gen_model6,
    gen_model7,
    generate,
    sample_latent,
)
from .multigraph import Multigraph, read_graph, write_graph
from .rand import Stream, StreamKey, make_stream

__version__ = "0.1.0"
