"""Exact deformation quantization over the rationals.

Modules: ``series`` (truncated lam-series of polynomials), ``lie`` (structure
constants, Poisson bracket, Campbell-Hausdorff), ``gutt`` (the product
transported from the enveloping algebra), ``fedosov`` (Weyl bundle
construction on a linear symplectic base), ``groebner`` and ``orbit``
(quotients by central ideals) and ``suites`` (randomized property checks).
"""

__version__ = "0.1.0"
