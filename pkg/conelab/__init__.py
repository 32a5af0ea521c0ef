"""
Cone Lab: Jordan algebras, symmetric cones, orientations and C*-reconstruction.
"""

__version__ = "0.1.0"
