"""Keyed communication in quantum noise: measures and protocol simulators."""

try:
    from ._kcq import *  # noqa: F401,F403  (installed package layout)
    from ._kcq import __version__  # noqa: F401
except ImportError:  # build-tree layout: extension on PYTHONPATH
    from _kcq import *  # noqa: F401,F403
    from _kcq import __version__  # noqa: F401
