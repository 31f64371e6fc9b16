"""Multi-client searchable symmetric encryption with attribute-based access control."""

__version__ = "0.1.0"
