"""Wind-tree billiards: geometry, unfoldings, induction dynamics, certificates."""

__version__ = "0.1.0"
