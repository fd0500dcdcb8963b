"""Published benchmark values for the bridging instances, used by ``reproduce``.

Each row gives (lower bound from binary omega*, lower bound from relaxed
omega*, optimal gap, full-relaxation upper bound) and the published optimal
bridging.  "F1" is the builtin pair of fulvenes joined at vertices 1 and 2.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ReferenceRow:
    GA: str
    GB: str
    bridge: tuple[int, ...]
    lower_sdp: float
    lower_sir: float
    opt: float
    upper_sdp: float
    bridging: str

    @property
    def label(self) -> str:
        return f"{self.GA}/{self.GB} {self.bridge}"


TABLE_1 = (
    ReferenceRow("F0", "F0", (1, 2), 0.233688, 0.531664, 0.74947, 0.87214, "1↦3,5; 2↦6"),
    ReferenceRow("F0", "F0", (1, 4), 0.333126, 0.72678, 0.85828, 0.87214, "1↦∅; 4↦3,5,6"),
    ReferenceRow("F0", "F0", (1, 3), 0.333126, 0.719668, 0.81389, 0.87214, "1↦4; 3↦4"),
    ReferenceRow("F1", "F0", (1, 2), 0.163626, 0.450022, 0.56655, 0.56666, "1↦∅; 2↦9,11,12"),
    ReferenceRow("P(4)", "P(4)", (2, 3), 0.472136, 0.86953, 1.06418, 1.23607, "2↦2,4; 3↦1,3"),
    ReferenceRow("P(6)", "P(4)", (1, 3), 0.367365, 0.811369, 0.87366, 0.89008, "1↦4,6; 3↦4,6"),
    ReferenceRow("P(6)", "P(4)", (2, 3), 0.367365, 0.737641, 0.87321, 0.89008, "2↦4,6; 3↦1,3"),
    ReferenceRow("P(10)", "P(4)", (2, 3), 0.252282, 0.523808, 0.56837, 0.56926, "2↦8,10; 3↦∅"),
    ReferenceRow("COMB(4)", "P(4)", (2,), 0.38832, 0.73094, 0.93258, 0.95452, "2↦3,8"),
)

# Same instances with every vertex degree of the bridged graph capped at 3.
TABLE_2 = (
    ReferenceRow("F0", "F0", (1, 2), 0.233688, 0.507678, 0.720830, 0.87214, "1↦∅; 2↦6"),
    ReferenceRow("F0", "F0", (1, 4), 0.233688, 0.468053, 0.720830, 0.87214, "1↦6; 4↦∅"),
    ReferenceRow("F0", "F0", (1, 3), 0.333126, 0.706635, 0.776875, 0.87214, "1↦6; 3↦6"),
    ReferenceRow("F1", "F0", (1, 2), 0.163626, 0.389941, 0.493727, 0.566658, "1↦6; 2↦∅"),
    ReferenceRow("P(4)", "P(4)", (2, 3), 0.472136, 0.869530, 0.954520, 1.23607, "3↦∅; 2↦2"),
    ReferenceRow("P(6)", "P(4)", (1, 3), 0.367365, 0.811369, 0.828427, 0.89008, "1↦4,6; 3↦2"),
    ReferenceRow("P(6)", "P(4)", (2, 3), 0.367365, 0.737641, 0.820751, 0.89008, "2↦5; 3↦2"),
    # the published bridging names vertex 11 of a 10-vertex G_A; only the value is compared
    ReferenceRow("P(10)", "P(4)", (2, 3), 0.252282, 0.523808, 0.559046, 0.56926, "2↦∅; 3↦11"),
    ReferenceRow("COMB(4)", "P(4)", (2,), 0.38832, 0.692266, 0.890084, 0.95452, "2↦4"),
)

TABLES = {1: (TABLE_1, None), 2: (TABLE_2, 3)}  # rows, max_degree
TOLERANCE = 1e-3

# Single-edge-pair example: both K2 vertices bridged to vertex 1 of another K2.
EXAMPLE_K2 = {
    "spectrum": (2.1701, 0.3111, -1.0, -1.4812),
    "opt": 1.3111,
    "upper_sdp": 1.67597,
}

FULVENE_SPECTRUM = (2.1149, 1.0, 0.6180, -0.2541, -1.6180, -1.8608)
FULVENE_GAP = 0.872134

FULVENE_BRIDGEABLE = {
    1: [(1,), (2,), (3,), (4,), (5,)],
    2: [(1, 2), (1, 3), (1, 4), (2, 4), (2, 5), (3, 4), (4, 5)],
    3: [(1, 2, 4), (1, 3, 4), (2, 4, 5)],
}
