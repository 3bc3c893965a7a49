"""PRB demand forecasting and two-network pool partitioning."""

__version__ = "0.1.0"
