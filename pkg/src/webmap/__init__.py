"""WebMap: a desk-scale semantic overlay engine.

Builds per-peer term proximity graphs from embedding similarities, assigns
documents to globally linked cluster files, computes weighted-HITS
signposts for intra-cluster navigation, and maintains density-based
subclusters with outlier handling.
"""

__version__ = "0.1.0"
