"""Rotation numbers of driven circle maps and ODEs, small-divisor
certification, and spectral conjugacy of near-rotation torus maps."""

from .diophantine import (
    DiophantineCertificate,
    certify,
    resonance_screen,
    suggest_quadratic_irrational,
)
from .dynamics import (
    AlmostPeriodicPath,
    BernoulliShift,
    CircleLift,
    TorusRotation,
    displacement_spread,
    iterate,
    make_arnold_family,
    make_conjugated_rotation,
    step,
)
from .fourier import (
    FourierSeries,
    StripNorm,
    compose_displacement,
    decay_fit,
    derivative,
    from_grid,
    majorant_norm,
    mean,
    remove_mean,
    to_grid,
)
from .kam import (
    ConjugacyResult,
    KamConfig,
    KamState,
    TorusMap,
    conjugacy_defect,
    conjugate_skew_product,
    invert_near_identity,
    kam_step,
    match_rotation_parameter,
    run_kam,
    small_divisor_bound_check,
    solve_homological,
)
from .rotation import (
    OdeField,
    RotationEstimate,
    continuity_probe,
    deterministic_enclosure,
    estimate_iid_composition,
    estimate_map,
    estimate_map_cesaro,
    estimate_ode,
    estimate_planar_homogeneous,
    predicted_iid_rotation,
)

__version__ = "0.1.0"
