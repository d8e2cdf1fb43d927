"""towbench: a behavioral-testing workbench for a planning agent that plays
a two-lane tug-of-war strategy game.

The package plays games with a depth-2 minimax planner built on pluggable
model backends (exact, flaw-injected, or learned), records every search tree
into a relational store, and evaluates user-written query rules over the
stored inferences to surface reasoning flaws.
"""

__version__ = "0.1.0"
