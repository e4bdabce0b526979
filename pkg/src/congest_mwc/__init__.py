"""Round-synchronous CONGEST simulation and minimum-weight-cycle approximation.

The package is organized as a small library:

``graphs``
    Graph container, generators, stretching and weight scaling.
``engine``
    The round-synchronous message-passing engine and its round ledger.
``primitives``
    Pipelined BFS, source detection, broadcast and convergecast.
``multisource``
    Multi-source exact and approximate shortest paths.
``mwc_directed``, ``mwc_undirected``, ``mwc_weighted``
    The cycle approximation operations built on the primitives.
``oracles``
    Sequential exact references used by the test-suite and the ``verify``
    command.
``gadgets``
    Hard-instance generator families with known answer structure.
"""

from __future__ import annotations

__version__ = "0.1.0"
