"""Multilingual news-article similarity engine.

Entity-feature cosines plus a trainable Siamese document encoder, fused by a
small MLP; BM25-driven augmentation with self-labeling; Pearson/Williams
evaluation tooling.
"""

__version__ = "0.1.0"
