"""Numerical kit for symmetrization-based comparison bounds on
curvature-dimension model segments: model geometry, decreasing
rearrangements, explicit radial p-Poisson solutions, first p-Laplacian
eigenpairs and the inequality checks that tie them together."""

__version__ = "0.1.0"
