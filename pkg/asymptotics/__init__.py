"""Commutator solves, Goodman frames, Gap-Lemma bases and reduced-flow expansions."""

from asymptotics.frames import DiagonalizationStage, GoodmanFrame, block_diagonalize, goodman_frame
from asymptotics.gap import GapSolution, gap_basis
from asymptotics.reduced_flow import ReducedFlow, direct_flow, reduced_flow_first_order
from asymptotics.sylvester import SylvesterSolution, sylvester

__all__ = [
    "sylvester",
    "SylvesterSolution",
    "goodman_frame",
    "GoodmanFrame",
    "block_diagonalize",
    "DiagonalizationStage",
    "gap_basis",
    "GapSolution",
    "reduced_flow_first_order",
    "direct_flow",
    "ReducedFlow",
]
