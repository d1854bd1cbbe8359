"""Service function chain placement over heterogeneous VNF instances."""

__version__ = "0.1.0"
