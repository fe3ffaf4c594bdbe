"""Multi-feature rumor blocking: choose positive seed users that keep the most
users out of a rumor cascade spreading independently over feature layers."""

from ._backend import BACKEND
from .baselines import greedy_mc, proximity, random_baseline
from .diffusion import (
    CascadeSeeds,
    ExactOracle,
    InstanceTooLarge,
    LayerOutcome,
    MCEstimate,
    evaluate_f_exact,
    evaluate_f_mc,
    simulate_layer,
    user_activation,
)
from .graph import FeatureModel, Graph, ParseError, edge_prob, load_graph, parse_edge_list, random_graph, validate_feature_model
from .sampling import MultiSample, SamplePool, SampleStream, covers, estimate_W, multi_sampling, r_sampling, single_sampling
from .solver import (
    Solution,
    SolverParams,
    compute_lambda_prime,
    compute_lambda_star,
    log_binomial,
    node_selection,
    revised_imm,
    sampling_phase,
)

__version__ = "0.1.0"
