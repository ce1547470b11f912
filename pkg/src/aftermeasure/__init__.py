"""Geometry of standard and generalized quantum measurements.

Measurement channels over density matrices, SIC-POVM construction, volumes
of the state body, outcome simplex and after-measurement set, membership
tests, Naimark dilation and finite-ensemble admissibility simulation.
"""

__version__ = "0.1.0"
