"""Correlation-based filtering and clustering of stock returns.

Pipeline: prices -> log-returns (optionally market-detrended) -> Pearson
correlation -> distance -> MST / PMFG -> SL, AL, CL, DBHT or k-medoids
clusters -> disparity, adjusted Rand index and overexpression against a
reference taxonomy.
"""
__version__ = "0.1.0"

from ._kernels import BACKEND
from .correlation import CorrelationMatrix, DistanceMatrix, WeightScheme, pearson, to_distance
from .dbht import DbhtResult
from .filtergraph import bubble_tree, mst, pmfg
from .ingest import PricePanel, ReturnsPanel, Taxonomy, detrend_market_mode, load_prices, load_taxonomy, log_returns
from .kmedoids import PamConfig, kmedoids
from .linkage import Dendrogram, Partition, cut
from .metrics import adjusted_rand, disparity, hypergeom_pmf, overexpression_scan

__all__ = [
    "BACKEND",
    "CorrelationMatrix",
    "DbhtResult",
    "Dendrogram",
    "DistanceMatrix",
    "PamConfig",
    "Partition",
    "PricePanel",
    "ReturnsPanel",
    "Taxonomy",
    "WeightScheme",
    "adjusted_rand",
    "bubble_tree",
    "cut",
    "detrend_market_mode",
    "disparity",
    "hypergeom_pmf",
    "kmedoids",
    "load_prices",
    "load_taxonomy",
    "log_returns",
    "mst",
    "overexpression_scan",
    "pearson",
    "pmfg",
    "to_distance",
]
