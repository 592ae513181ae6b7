"""Process matrices, superpositions of direct pure processes, and capacity checks."""

__version__ = "0.1.0"
