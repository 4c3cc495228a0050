"""Tests for the graph-rkhs package."""
