"""Multipartite no-signaling boxes, Svetlichny inequalities and information causality."""

from .boxcore import (
    BoxError,
    ConditionalBox,
    NoSignalingReport,
    SignalingError,
    make_bipartite_isotropic,
    make_deterministic,
    make_isotropic,
    marginal,
    sample,
    verify_no_signaling,
)
from .functionals import SvetlichnyReport, evaluate, hybrid_local_bound
from .icgame import ICGameResult, ic_violation_scan, tripartite_guess_game
from .wiring import GroupSplit, merge_parties, restrict_inputs

__version__ = "0.1.0"

__all__ = [
    "BoxError",
    "ConditionalBox",
    "GroupSplit",
    "ICGameResult",
    "NoSignalingReport",
    "SignalingError",
    "SvetlichnyReport",
    "evaluate",
    "hybrid_local_bound",
    "ic_violation_scan",
    "make_bipartite_isotropic",
    "make_deterministic",
    "make_isotropic",
    "marginal",
    "merge_parties",
    "restrict_inputs",
    "sample",
    "tripartite_guess_game",
    "verify_no_signaling",
]
