"""Synthetic corpora, manifests and batch loading."""
