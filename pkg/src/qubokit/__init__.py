"""Combinatorial-optimization toolkit for QUBO benchmarks.

The package covers the full pipeline from problem construction to reported
tables: QUBO data model and metrics (:mod:`qubokit.core`), penalty
formulations for max-cut, vertex cover, and assignment problems
(:mod:`qubokit.formulations`), seeded dataset generators
(:mod:`qubokit.generators`), annealing and exhaustive solvers
(:mod:`qubokit.solvers`), a block-structural assignment decomposition
(:mod:`qubokit.decomposition`), a warehouse order-picking simulator with
slotting policies (:mod:`qubokit.warehouse`), text formats
(:mod:`qubokit.io`), and the benchmark harness behind the ``qubokit``
command (:mod:`qubokit.bench`).
"""
from .core import (
    BinarySample,
    MetricsSummary,
    QuboMatrix,
    SampleSet,
    delta_energy,
    energies,
    energy,
    pseudo_energy,
    qubo_from_text,
    qubo_to_text,
    summarize,
    violation_percentage,
)
from .errors import (
    CapacityError,
    DimensionError,
    DomainError,
    EmptyInputError,
    FormatError,
    InventoryError,
    ParameterError,
    QubokitError,
)
from .formulations import (
    QapInstance,
    QuboProblem,
    WeightedGraph,
    a_to_q,
    decode_permutation,
    maxcut_to_qubo,
    mvc_to_qubo,
    permutation_to_bits,
    prepare_matrix_a,
    prepare_vector_b,
    qap_energy,
    qap_to_qubo,
    qap_violations,
)
from .generators import (
    GeneratorSpec,
    gen_chimera,
    gen_hamming_graph,
    gen_orders,
    gen_tinyqap,
    gen_warehouse_dataset,
    generate,
    gnm_degree_sweep,
    gnm_random_graph,
    subgraph_sample,
)
from .solvers import (
    PermAnnealConfig,
    PtConfig,
    RandomConfig,
    SaConfig,
    TabuConfig,
    anneal_permutation,
    brute_force_qap,
    brute_force_qubo,
    child_rng,
    child_seeds,
    parallel_tempering,
    permutation_annealer,
    random_sampler,
    simulated_annealing,
    tabu_search,
)
from .decomposition import (
    DecompositionConfig,
    DecompositionPlan,
    DecompositionResult,
    Partition,
    exterior_penalty_solve,
    match_subsets,
    partition_items,
    partition_locations,
    plan_from_json,
    plan_to_json,
    predicted_block_energy,
    solve_decomposed,
    verify_block_structure,
)
from .warehouse import (
    Assignment,
    Layout,
    OosConfig,
    OrderSet,
    WarehouseDataset,
    build_distance_matrix,
    build_frequency_matrix,
    policy_abc,
    policy_coi,
    policy_oos,
    policy_qap_decomp,
    policy_random,
    route_lengths,
    sku_popularity,
    sshape_route_length,
    total_pick_distance,
)
from .bench import (
    ResultRecord,
    RunManifest,
    WarehouseManifest,
    report_results,
    solve_manifest,
    warehouse_table,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # core
    "QuboMatrix", "BinarySample", "SampleSet", "MetricsSummary",
    "energy", "energies", "delta_energy", "summarize",
    "violation_percentage", "pseudo_energy", "qubo_to_text", "qubo_from_text",
    # errors
    "QubokitError", "DimensionError", "DomainError", "ParameterError",
    "CapacityError", "EmptyInputError", "FormatError", "InventoryError",
    # formulations
    "WeightedGraph", "QapInstance", "QuboProblem",
    "maxcut_to_qubo", "mvc_to_qubo", "qap_to_qubo",
    "prepare_matrix_a", "prepare_vector_b", "a_to_q",
    "qap_energy", "qap_violations", "decode_permutation", "permutation_to_bits",
    # generators
    "GeneratorSpec", "generate", "gen_chimera", "subgraph_sample",
    "gnm_random_graph", "gnm_degree_sweep", "gen_tinyqap",
    "gen_hamming_graph", "gen_orders", "gen_warehouse_dataset",
    # solvers
    "SaConfig", "PtConfig", "TabuConfig", "RandomConfig", "PermAnnealConfig",
    "simulated_annealing", "parallel_tempering", "tabu_search",
    "random_sampler", "permutation_annealer", "anneal_permutation",
    "brute_force_qubo", "brute_force_qap", "child_seeds", "child_rng",
    # decomposition
    "Partition", "DecompositionConfig", "DecompositionPlan",
    "DecompositionResult", "partition_items", "partition_locations",
    "match_subsets", "exterior_penalty_solve", "solve_decomposed",
    "predicted_block_energy", "verify_block_structure",
    "plan_to_json", "plan_from_json",
    # warehouse
    "Layout", "OrderSet", "WarehouseDataset", "Assignment", "OosConfig",
    "build_frequency_matrix", "build_distance_matrix", "sku_popularity",
    "sshape_route_length", "route_lengths", "total_pick_distance",
    "policy_random", "policy_coi", "policy_abc", "policy_oos",
    "policy_qap_decomp",
    # bench
    "RunManifest", "WarehouseManifest", "ResultRecord",
    "solve_manifest", "report_results", "warehouse_table",
]
