"""Unit tests for CEShock."""
