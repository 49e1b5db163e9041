"""Pointwise curvature engine and identity-verification suite for
conformally recurrent pseudo-Riemannian metrics."""

__version__ = "0.1.0"
