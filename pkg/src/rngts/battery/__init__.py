"""Statistical test catalog over RandomStreams."""

from .base import (
    TestCase,
    TestOutcome,
    chi_square_result,
    gaussian_result,
    ks_result,
    pool_cells,
)
from .games import (
    CrapsTest,
    GcdTest,
    MaurersUniversalTest,
    RepetitionTest,
    SqueezeTest,
    SQUEEZE_CELL_PROBS,
    craps_throw_probabilities,
    craps_win_probability,
    maurer_reference,
    repetition_bins,
    repetition_pmf,
)
from .spatial import (
    BinaryRankTest,
    BirthdaySpacingsTest,
    CollisionTest,
    MinimumDistanceTest,
    Monkey20BitTest,
    ParkingLotTest,
    RandomWalkTest,
    collision_null_distribution,
    rank_distribution,
)
from .uniformity import (
    ChisqrUniformityTest,
    CouponCollectorTest,
    GapTest,
    KsUniformityTest,
    MaxOfTTest,
    PermutationTest,
    PokerTest,
    RunsTest,
    SerialCorrelationTest,
    SerialTest,
)

ALL_TESTS = (
    ChisqrUniformityTest,
    KsUniformityTest,
    GapTest,
    SerialTest,
    PokerTest,
    CouponCollectorTest,
    PermutationTest,
    RunsTest,
    MaxOfTTest,
    CollisionTest,
    SerialCorrelationTest,
    BirthdaySpacingsTest,
    BinaryRankTest,
    ParkingLotTest,
    MinimumDistanceTest,
    SqueezeTest,
    CrapsTest,
    RandomWalkTest,
    RepetitionTest,
    GcdTest,
    MaurersUniversalTest,
    Monkey20BitTest,
)

__all__ = [
    "TestCase",
    "TestOutcome",
    "chi_square_result",
    "gaussian_result",
    "ks_result",
    "pool_cells",
    "ALL_TESTS",
    "SQUEEZE_CELL_PROBS",
    "collision_null_distribution",
    "craps_throw_probabilities",
    "craps_win_probability",
    "maurer_reference",
    "rank_distribution",
    "repetition_bins",
    "repetition_pmf",
] + [cls.__name__ for cls in ALL_TESTS]
