"""Data models for mmgesture."""
