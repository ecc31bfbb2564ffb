"""
RAQ-DOA
=======
Direction-of-arrival estimation with Rydberg atomic quantum uniform linear
arrays: atomic response, optical transduction, array signal model,
estimators, bounds and a Monte Carlo sweep harness.
"""

__version__ = "1.0.0"
__author__ = "Array Sensing Team"
