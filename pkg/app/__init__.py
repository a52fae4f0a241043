"""GMMS Purification Toolkit: Gaussian maximally mixed states in a truncated Fock space"""
__version__ = "1.0.0"
