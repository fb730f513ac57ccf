"""Benchmarking for scenario-se."""
