"""Exact genus-zero r-spin intersection numbers."""
