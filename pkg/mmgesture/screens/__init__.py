"""Textual screens of the stream monitor."""
