"""
modlie - exact computations with modular Lie (super)algebras and their p|2p-structures
"""

__version__ = "0.3.0"
