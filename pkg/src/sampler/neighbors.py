import logging
import math

import faiss
import numpy as np
from scipy.special import gammaln

from ..errors import ActiveTaskError

logger = logging.getLogger(__name__)

# faiss ranks in float32; this many extra candidates are re-ranked in float64
RERANK_MARGIN = 16


class InsufficientBuffer(ActiveTaskError):
    pass


class EmbeddingIndex:
    """Exact nearest-neighbour lookup over one particle subset"""

    def __init__(self, subset: np.ndarray):
        self.subset = np.ascontiguousarray(subset, dtype=np.float64)
        if self.subset.ndim != 2:
            raise ValueError(f"subset must be 2-d, got shape {self.subset.shape}")
        self.index = faiss.IndexFlatL2(self.subset.shape[1])
        if len(self.subset):
            self.index.add(self.subset.astype(np.float32))

    def __len__(self) -> int:
        return len(self.subset)

    def kth_distance(self, queries: np.ndarray, k: int) -> np.ndarray:
        """Euclidean distance from each query row to its k-th nearest subset element"""
        if len(self.subset) < k:
            raise InsufficientBuffer(f"need at least {k} particles, have {len(self.subset)}")
        queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
        width = min(len(self.subset), k + RERANK_MARGIN)
        _, idx = self.index.search(np.ascontiguousarray(queries.astype(np.float32)), width)
        out = np.empty(len(queries))
        for n, q in enumerate(queries):
            cand = self.subset[idx[n][idx[n] >= 0]]
            dist = np.sqrt(np.sum((cand - q) ** 2, axis=1))
            out[n] = np.sort(dist)[k - 1]
        return out


def knn_distance(emb: np.ndarray, subset: np.ndarray, k: int) -> float:
    """d(phi(w), phi(w_K)): distance to the K-th nearest neighbour within the subset"""
    return float(EmbeddingIndex(subset).kth_distance(np.asarray(emb).reshape(1, -1), k)[0])


def unit_ball_log_volume(dim: int) -> float:
    return 0.5 * dim * math.log(math.pi) - float(gammaln(0.5 * dim + 1.0))


def density_estimate(d: float, k: int, m: int, dim: int) -> float:
    """Particle estimate K / (m * V_K), V_K the dim-ball volume of radius d; +inf at d = 0"""
    if d < 0:
        raise ValueError(f"distance must be non-negative, got {d}")
    if d == 0:
        return math.inf
    log_p = math.log(k) - math.log(m) - unit_ball_log_volume(dim) - dim * math.log(d)
    return math.exp(log_p) if log_p < 700.0 else math.inf
