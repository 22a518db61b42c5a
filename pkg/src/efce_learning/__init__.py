"""No-regret learning dynamics for extensive-form correlated equilibria."""

__version__ = "0.1.0"
