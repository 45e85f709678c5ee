"""Exactly simulated Gaussian velocity-jump samplers for Gibbs distributions.

The process moves in straight lines and changes velocity at the events of
thinned Poisson clocks. Jumps use the corrected Gaussian kernel (with the
zig-zag and bouncy particle samplers as special cases), optionally combined
with velocity refreshment and force splittings.
"""

__version__ = "0.1.0"

from .analysis import (
    EstimateWithError,
    RateInputs,
    batch_means,
    kappa_bound,
    l2_decay_check,
    trajectory_batch_means,
    wedge_conditioned_bias,
)
from .engine import (
    KineticState,
    SimConfig,
    Trajectory,
    gradient_eval_count,
    simulate,
    simulate_replicas,
    time_average_quadratic,
)
from .kernels import (
    BouncyKernel,
    EpsilonSchedule,
    GaussianJumpKernel,
    ZigZagCoordinateKernel,
    bouncy_kernel,
    gaussian_kernel,
    zigzag_kernels,
)
from .potential import ForceComponent, PotentialModel, QuadraticPotential, bounded_force, tangent
from .reference import VerletConfig, verlet
from .refresh import RefreshSpec
from .rng import RandomStream, make_stream
from .special import theta, tilted_moment, tilted_pdf
from .tilted import ProposalKind, TiltedSample, expected_trials, sample_tilted, sample_tilted_with
