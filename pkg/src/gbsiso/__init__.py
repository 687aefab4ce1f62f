"""Exact hafnian-based graph invariants from Gaussian boson sampling encodings."""

__version__ = "0.1.0"
