"""storyloop: an executable environment for interactive narrative sessions.

The package builds a structured story world from a short emotional seed,
runs a multi-turn interaction loop with layered memory, pacing defenses,
reflection-guided planning and novelty-screened interactive artifacts, and
ships an evaluation harness (persona simulator, multi-judge rubric scoring,
Plackett-Luce rank aggregation) plus an HTTP service for live sessions.
"""

__version__ = "0.1.0"
