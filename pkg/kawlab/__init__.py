"""
kawlab: a numerical laboratory for the boundary-damped Kawahara equation.

The numerical core lives in ``kawlab.core``; ``kawlab.experiments`` turns the
core into runnable, verdict-producing experiments and ``kawlab.cli`` exposes
them on the command line.
"""

__version__ = "1.0.0"
