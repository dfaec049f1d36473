"""pjmp: exact and Monte Carlo analysis of finite pure-jump neuron networks.

The package enumerates the reachable state space of an interacting
neuron model with capped membrane potentials, builds exact transition
kernels, verifies a family of entropy and concentration inequalities for
the process, and cross-checks everything against two independent
trajectory samplers.
"""

from ._backend import backend_name

__version__ = "0.1.0"

__all__ = ["backend_name", "__version__"]
