"""Multi-view profiling of news outlets: graph building, GNN embeddings,
view fusion (static and PPO-weighted), voting and evaluation."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    BIAS3,
    BIAS5,
    FACT3,
    FACT5,
    DatasetSplit,
    EmbeddingTable,
    LabelScale,
    MetricsReport,
    Outlet,
    ViewId,
    get_scale,
    normalize_domain,
    stratified_split,
)
from .errors import InputError, MediaFuseError, NumericError, ShapeError  # noqa: E402

__all__ = [
    "BIAS3",
    "BIAS5",
    "FACT3",
    "FACT5",
    "DatasetSplit",
    "EmbeddingTable",
    "InputError",
    "LabelScale",
    "MediaFuseError",
    "MetricsReport",
    "NumericError",
    "Outlet",
    "ShapeError",
    "ViewId",
    "get_scale",
    "normalize_domain",
    "stratified_split",
]
