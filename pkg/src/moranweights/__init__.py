"""Ancestral weight dynamics in multi-parent Moran models.

Three layers that cross-validate each other:

* ``model`` / ``weights`` / ``kernel`` / ``montecarlo``: simulate the weight
  dynamics and estimate limiting marginal weights with certified bounds.
* ``configchain`` / ``stationary`` / ``bruteforce``: exact finite-N analysis
  of the lumped particle-configuration chain in rational arithmetic.
* ``limitcoeff`` / ``limitlaw``: the large-N limit law (atom at zero plus an
  exponential) and its moment coefficients.

``verify`` wires the layers together; ``cli`` exposes them as subcommands.
"""

__version__ = "0.1.0"
