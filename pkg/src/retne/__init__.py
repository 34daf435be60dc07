"""Neuroevolution over fixed-size feature-matrix genomes.

Genomes are real matrices holding every bias and connection weight of a
size-capped feedforward network, which makes the population a point cloud
in a metric space.  Besides local mutation, new individuals are created
globally as interior points between elite genomes (midpoint or
golden-section blends), guided by per-cluster fitness/distance
correlations.  Built-in benchmark environments (logic gates, cart-pole
with noise wrappers, function landscapes) and an experiment harness
reproduce the accompanying statistics tables at desk scale.
"""

from .genome import (
    ACTIVATIONS,
    GenomeConfig,
    Individual,
    InvalidGenomeError,
    Network,
    check_distance,
    create,
    distance,
    mutable_cells,
    random_matrix,
    single_connection_matrix,
    wired_node_count,
)
from .variation import (
    GOLDEN_MAJOR,
    GOLDEN_MINOR,
    MutationConfig,
    binary_combine,
    golden_combine,
    mutate_near,
)
from .evolution import (
    METHODS,
    RET_METHODS,
    ClusterView,
    ConfigurationError,
    EvolutionConfig,
    Population,
    RunResult,
    best_of_cluster,
    cluster_correlation,
    cluster_population,
    evolve_generation,
    init_population,
    pearson,
    ret_pair,
    run_evolution,
)
from . import environments
from .harness import (
    ExperimentConfig,
    ExperimentStats,
    RunRecord,
    compute_stats,
    default_experiment,
    noise_sweep,
    population_size_for_budget,
    read_results,
    run_experiment,
    write_results,
)

__version__ = "0.1.0"
