"""
Command line scripts.

.. autosummary::
    :toctree:

    entbound
"""
