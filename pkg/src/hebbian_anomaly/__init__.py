"""Localized anomaly detection in graphs whose nodes carry activity time series.

Stage 1 keeps nodes with enough bursts, stage 2 learns one Hebbian memory
network per time window, and clusters of the learned networks are reported as
events. A learned network can also complete a partial event pattern.
"""

from .community import (
    ClusterReport,
    Partition,
    cluster_activity,
    connected_components,
    extract_clusters,
    louvain,
    modularity,
    network_stats,
)
from .core import TemporalGraph, Window, induced_subgraph, slice_windows
from .filter import BurstProfile, NodeStats, ScoreConfig, burst_mask, burstiness, filter_potential, node_scores
from .learn import LearnConfig, MemoryNetwork, activity, learn_all_windows, learn_window, similarity
from .pipeline import PipelineConfig, run_pipeline
from .recall import RecallConfig, RecallResult, build_initial_pattern, hopfield_step, recall

__version__ = "0.1.0"
