"""Radial ground states of a coupled pair of semilinear Schrodinger equations."""

from .analysis import (
    IdentityReport,
    check_c1_c2_bound,
    check_energy_identity,
    identity_report,
    ratio_monotonicity,
    verify_decay,
    wronskian_integral,
)
from .census import CensusConfig, CensusResult, census, symmetric_slice
from .criteria import (
    PsiAnalysis,
    Regime,
    RegimeReport,
    analyze_psi,
    check_A2,
    check_A4,
    check_QS,
    check_sign_conditions,
    classify,
    find_kb,
    psi,
)
from .errors import NumericalError, RadialNLSError, ValidationError
from .factory import (
    MaZhaoParams,
    make_mazhao_solution,
    make_mazhao_system,
    make_symmetric,
    make_theta_family,
    make_triple,
    mazhao_beta,
    mazhao_ratio,
    mazhao_scale,
    mazhao_unscale,
)
from .ground_state import GroundState, soliton_1d, solve_scalar
from .integrator import Outcome, ShootingConfig, TrajectoryOutcome, integrate, taylor_start, wronskian_consistency
from .model import (
    DecayCertificate,
    GrowthBound,
    Nonlinearity,
    Parameters,
    RadialProfile,
    black_box,
    make_beta_system,
    make_coupled_power,
    residual,
)

__version__ = "0.1.0"
