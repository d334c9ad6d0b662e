"""Prime residue streams driving a four-map iterated function system."""

__version__ = "0.1.0"
