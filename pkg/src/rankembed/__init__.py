"""Embeddings of products of rank-one spaces into higher-rank symmetric spaces and buildings.

Exact verification tooling: root systems, spherical Coxeter complexes, the
AN-map into SL(n+1, R)/SO(n+1), products of trees, and the SL3(Q_p) building.
"""

from .errors import *  # noqa: F401,F403
from .reports import VerificationReport, emit, parse
from .roots import CartanType, Root, RootSystem, enumerate_positive_roots, select_strongly_commuting_roots
from .suite import RunConfig, run_all

__all__ = [
    "CartanType", "Root", "RootSystem", "RunConfig", "VerificationReport",
    "emit", "enumerate_positive_roots", "parse", "run_all", "select_strongly_commuting_roots",
]
__version__ = "0.1.0"
