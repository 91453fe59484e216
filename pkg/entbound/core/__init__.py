"""
Core functionality for entanglement bounds.

.. autosummary::
    :toctree:

    audit
    bounds
    concurrence
    conjugate
    evaluate
    manager
    maps
    observables
    scan
    states
"""
