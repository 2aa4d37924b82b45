"""Discretized fractional maximal operators, their commutators, and
variable-exponent Lebesgue norms, with a numerical verification harness
for the oscillation functionals that characterize Lipschitz and BMO
symbols."""

from .errors import (
    ConfigError,
    CorpusError,
    DomainMismatchError,
    ExponentClassError,
    FamilyError,
    FracmaxError,
    HypothesisViolationError,
)
from .grid import (
    Cube,
    CubeFamily,
    Domain,
    GridFunction,
    average,
    decompose,
    indicator,
    integrate,
    make_corpus,
    pointwise_lipschitz_seminorm,
    read_csv,
    read_gfn,
    restrict,
    write_csv,
    write_gfn,
)
from .maxop import (
    FracParams,
    PrefixTable,
    check_cube_lemma,
    maximal,
    maximal_commutator,
    maximal_local,
    nonlinear_commutator,
)
from .oscfun import (
    FunctionalKind,
    OscFunctionalSpec,
    SupReport,
    check_commutator_identity,
    check_ef_balance,
    check_mc_lower_bound,
    check_nclip3_chain,
    check_oscillation_bound,
    check_pointwise_domination,
    cube_functional_value,
    sup_functional,
)
from .varlex import (
    Exponent,
    NormResult,
    check_chi_embedding,
    check_chi_product,
    check_holder,
    check_holder_product,
    check_power_identity,
    conjugate,
    log_holder_modulus,
    luxemburg_norm,
    modular,
    sobolev_shift,
)
from .verify import (
    ExperimentConfig,
    OperatorNormBound,
    Thresholds,
    VerdictReport,
    discriminate,
    operator_norm_lower_bound,
    run_suite,
    scaling_study,
)

__version__ = "0.1.0"
