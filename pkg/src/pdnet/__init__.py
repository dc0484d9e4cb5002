"""Build and query paper-dataset networks from research paper texts."""

__version__ = "0.1.0"
