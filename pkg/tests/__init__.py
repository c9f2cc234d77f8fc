"""Tests for orthoeq package."""
