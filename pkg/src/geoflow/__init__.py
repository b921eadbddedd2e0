"""Systoles of strictly convex two-spheres in R^3.

Discrete loop spaces, curve-shortening flow, Birkhoff min-max, nested-body
systole monotonicity, and capacity reports for unit-disc cotangent bundles.
"""

__version__ = "0.1.0"
