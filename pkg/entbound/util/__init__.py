"""
Utility functions for entbound

.. autosummary::
    :toctree:

    errors
    linalg
    random
    util
"""
