"""Executable toolkit for a call-by-value calculus with full ground references."""
