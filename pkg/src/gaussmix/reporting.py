"""Verdict plumbing shared by the verification drivers.

Margins are expressed in stderr units: a claim "holds" when every tested
instance satisfies its inequality with margin >= -3 units, "fails" when some
instance violates it by more than 5 units, and is "inconclusive" in between.
Deterministic (quadrature) checks carry stderr 0; their margins use an
absolute floor so the units stay finite and JSON-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .numerics import Estimate

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"

#: stderr floor for margins of deterministic comparisons
EXACT_FLOOR = 1e-12

#: verdict thresholds in stderr units
HOLD_SLACK = 3.0
FAIL_SLACK = 5.0


@dataclass(frozen=True)
class PairedComparison:
    """Two estimates evaluated on common random numbers, with the stderr of
    their difference (much smaller than the individual stderrs when the
    coupling works)."""

    value_a: Estimate
    value_b: Estimate
    diff: float
    diff_stderr: float


def margin_units(slack: float, stderr: float) -> float:
    """Signed margin in stderr units; positive means the inequality holds."""
    return slack / max(stderr, EXACT_FLOOR)


def verdict_from_margin(margin: float) -> str:
    if margin >= -HOLD_SLACK:
        return HOLDS
    if margin < -FAIL_SLACK:
        return FAILS
    return INCONCLUSIVE


def combine_verdicts(margins) -> tuple[str, float]:
    worst = min(margins)
    return verdict_from_margin(worst), worst


@dataclass
class VerificationReport:
    """Outcome of one verification run.

    ``rows`` holds per-instance numeric detail (one dict per tested instance
    or grid point) for delimited output and plotting; ``estimates`` the raw
    quantities behind the verdict; ``margin`` the worst instance margin in
    stderr units.
    """

    claim: str
    params: dict
    verdict: str
    margin: float
    seed: int
    stream_id: int
    estimates: list[Estimate] = field(default_factory=list)
    rows: list[dict] = field(default_factory=list)

    def __post_init__(self):
        if self.verdict not in (HOLDS, FAILS, INCONCLUSIVE):
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if math.isnan(self.margin):
            raise ValueError("margin must not be NaN")

    @property
    def exit_code(self) -> int:
        return {HOLDS: 0, FAILS: 2, INCONCLUSIVE: 3}[self.verdict]
