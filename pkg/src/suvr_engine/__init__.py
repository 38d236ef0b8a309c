"""
SUVR engine package.

This package implements search-based unsupervised representation learning:
a memory bank of instance embeddings, graph-traversal neighbor discovery,
the three-term training objective, a small MLP encoder and kNN evaluation.
"""
