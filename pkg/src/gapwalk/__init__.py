"""gapwalk: partial sums of a periodic function along a random-gap walk.

A simulation and verification lab for sums sum_k f(x * S_k mod 1) where
S_k is an increasing random walk with i.i.d. bounded-density gaps. The
package computes the limiting variance of the partial-sum process by
three mutually checking routes, tracks the geometric mixing of the walk
modulo 1, reproduces the long/short block bookkeeping behind the
invariance analysis, and runs a statistical battery for the Gaussian,
iterated-logarithm, small-deviation, and integral-test consequences.
"""

from . import blocks, density, gaps, limits, periodic, variance
from .blocks import (
    BlockSchedule,
    block_count_for,
    block_sums,
    block_total,
    block_variance_ratio,
    build_schedule,
    long_total,
    schedule_asymptotics,
    short_total,
)
from .density import DecayFit, Mod1Density, decay_fit, mod1_density, uniformity_gap
from .errors import (
    DegenerateFitError,
    GapwalkError,
    InvalidInputError,
    UnsupportedRepresentationError,
)
from .gaps import (
    GapDistribution,
    RaisedCosineGaps,
    TriangularGaps,
    UniformGaps,
    WalkPhasePath,
    gaps_from_json,
    gaps_to_json,
    sample_gaps,
    walk_phases,
    walk_phases_from_gaps,
)
from .limits import (
    KefpResult,
    LimitSeries,
    TestReport,
    TrajectoryCheckpoints,
    brownian_band_medians,
    chung_statistic,
    clt_test,
    fourth_moment_ratio,
    gaussian_trajectory,
    kefp_classify,
    lil_statistic,
    simulate_trajectory,
)
from .periodic import (
    SampledLipschitz,
    ShapeFunction,
    TrigPolynomial,
    function_from_json,
    function_to_json,
    mean_zero_project,
)
from .variance import VarianceReport

__version__ = "0.1.0"
