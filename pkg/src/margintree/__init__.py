"""Hierarchical maximum-margin clustering.

Top-down greedy construction of a cluster tree; each node split jointly
optimizes per-cluster linear models (sparse-group regularized squared-hinge
loss, proximal quasi-Newton) and balanced cluster assignments (min-cost
flow), with taxonomy evaluation metrics and k-means baselines.
"""

from .baselines import build_hkm, build_hkm_d, hkm_d_split_score, hkm_split_score
from .core import (
    AncestorChain,
    ClusterModels,
    Dataset,
    Hierarchy,
    NodeData,
    TreeNode,
    ancestor_chain,
    leaf_partition,
    subset,
)
from .data import SyntheticSpec, generate_synthetic, load_dataset, pca_reduce
from .errors import (
    ConfigError,
    GuardError,
    InfeasibleFlowError,
    ParseError,
    SolverError,
    StructureError,
    UnsplittableNodeError,
    ValidationError,
)
from .export import export_hierarchy, hierarchy_to_dict, load_hierarchy_json
from .flow import (
    FlowNetwork,
    FlowResult,
    brute_force_assignment,
    build_assignment_network,
    min_cost_flow,
    solve_balanced_assignment,
)
from .hier import BuildConfig, StoppingCriterion, build_hierarchy, global_objective, node_seed, should_stop
from .kmeans import KMeansResult, kmeans
from .metrics import (
    ClassTree,
    path_sharing_similarity,
    rand_index,
    semantic_score,
    shortest_path_similarity,
)
from .objective import (
    ExclusiveWeights,
    RegularizerConfig,
    cost_matrix,
    exclusive_reg,
    exclusive_weights,
    group_reg,
    hinge_grad,
    hinge_loss,
    node_objective,
)
from .optim import ProxSpec, SolverConfig, prox_group, prox_sparse_group, prox_weighted_l1, solve_w
from .split import BalanceBounds, SplitResult, balance_bounds, init_assignment, split_node, splitting_score

__version__ = "0.1.0"
