"""Graph matching by mirror descent on a heat-wavelet Gromov-Wasserstein objective."""
from .diffusion import DissimilarityPair, WaveletParams, build_dissimilarities, dissimilarity_pair, heat_wavelet
from .evaluation import EvalReport, evaluate, node_correctness, serialize_report
from .graph import (Graph, GraphFormatError, NoiseSpec, degrees, erdos_renyi, format_edge_list, from_edges,
                    inject_noise, k_hop_nodes, laplacian, pad_with_dummies, parse_edge_list, permute,
                    random_permutation)
from .inconsistency import PerturbationReport, csi, mnc, perturbation_report, si_matrix, si_one_hop_form, si_pair
from .matcher import InitStrategy, MatchConfig, MatchResult, SolverError, extract_correspondence, sigma_match
from .oracle import OracleResult, brute_force_gw, neighborhoods_isomorphic
from .transport import (ProjectionError, StepSchedule, gw_gradient, gw_objective, marginals, mirror_step,
                        sinkhorn_project)

__version__ = "0.1.0"
