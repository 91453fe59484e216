"""
Measurable bounds on concurrence and related entanglement checks.

Lower and upper bounds that are functions of purities and overlaps, and so can
be read off as mean values of observables on two copies of a state, together
with the positive map and witness bounds that extend them.

Submodules
==========

.. autosummary::
    :toctree: _autosummary

    core
    scripts
    util
"""

__version__ = "0.1.0"
