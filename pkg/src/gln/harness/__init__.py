"""Experiment harness: data ingestion, runners, serialization, metrics."""
