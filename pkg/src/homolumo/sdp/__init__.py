"""Block-LMI modelling and a small interior-point SDP solver."""

from .solver import LmiBlock, SdpProblem, SdpSettings, SdpSolution, SdpStatus, dump_problem, solve_sdp

__all__ = ["LmiBlock", "SdpProblem", "SdpSettings", "SdpSolution", "SdpStatus", "dump_problem", "solve_sdp"]
