"""Heat flow on [0, L] with a randomly switching boundary condition at x = L.

Subpackages: ``switching`` (environments and renewal queries), ``engine``
(generic two-flow pullback machinery), ``spectral`` (sine-series heat flows),
``closed_forms`` and ``verify`` (Monte Carlo checks and independent oracles).
"""

from .params import Params
from .switching import (
    ConfigurationError,
    Environment,
    EnvironmentBatch,
    Exponential,
    GeneralLaw,
    NumericalError,
    SwitchingLaws,
    locate,
    occupancy_p,
    sample_environment,
    stationary_age_cdf,
    switch_count,
)
from .engine import (
    Flow,
    FlowPair,
    PullbackSample,
    backward_orbit,
    certify_contraction,
    forward_orbit,
    invariance_pairs,
    process_at,
    pullback_batch,
    pullback_sample,
    stationary_batch,
    stationary_sample,
)
from .spectral import Basis, SpectralField, evaluate, make_flow_pair, project_ramp

__version__ = "0.1.0"
