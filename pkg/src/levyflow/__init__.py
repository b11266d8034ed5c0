"""levyflow: stochastic multiscale simulation engine.

From symbols of jump processes and their pseudo-differential operators to
(a) a particle-level invasion model with switchable noise laws and (b) a
macroscopic stochastic fractional reaction-diffusion system, with Monte
Carlo ensembles and verifiable numerical property checks.
"""

__version__ = "0.1.0"

from .drivers import (
    BridgeDriver,
    CauchyModulatedNoise,
    GaussianNoise,
    ProtonIndexDriver,
    QWienerSpec,
    RngStream,
    SwitchingNoise,
    alpha_of_h,
    bridge_value,
    draw_noise,
    sample_qwiener_increment,
)
from .ensemble import EnsembleConfig, EnsembleStats, run_ensemble, welford_merge
from .fracops import (
    FracLapOperator,
    alpha_resolvent_holder_check,
    apply_frac_laplacian,
    frac_constant,
    multiplier_lipschitz_check,
    spectral_oracle,
)
from .grids import Grid, GridField
from .macro import MacroConfig, MacroState, macro_init, macro_step, run_macro
from .micro import (
    MicroConfig,
    MicroState,
    density_histogram,
    deposit_fields,
    micro_init,
    micro_step,
    run_micro,
    survival_fraction,
)
from .symbols import (
    AffinePowerBernstein,
    CompoundPoissonSymbol,
    ComposedSymbol,
    DiscreteJumpLaw,
    DriftQuadraticSymbol,
    GaussianJumpLaw,
    IdentityBernstein,
    LevyQuadruple,
    PoissonSymbol,
    PowerBernstein,
    QuadraticSymbol,
    ScaledSymbol,
    ShiftedSymbol,
    StableSymbol,
    TripleSymbol,
    characteristic_function,
    compose_symbols,
    driven_symbol,
    eval_symbol,
    generator_symbol_table,
    growth_bound_constant,
)
