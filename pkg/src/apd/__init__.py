"""Aperiodic point-pattern diagnostics: generators for substitution and
cut & project chains, Meyer-property and local-complexity analyzers,
finite-volume diffraction with topological Bragg-peak tests, and
coincidence-rank computation."""

__version__ = "0.1.0"

from .pointset import (
    DELTA_EQ,
    Box,
    DifferenceSet,
    MeyerCheck,
    Patch,
    PatchCensus,
    PointPattern,
    covering_radius,
    difference_set,
    epsilon_dual,
    load_pattern,
    meyer_check,
    min_gap,
    patch_census,
    r_patch,
    repetitivity_radius,
    same_patch_classes,
    save_pattern,
    window_ladder,
)
from .generators import (
    FIBONACCI_EIGEN_BASIS,
    TAU,
    CutProjectScheme,
    SubstitutionSystem,
    fibonacci_chain,
    fibonacci_cp,
    fibonacci_sub,
    lattice,
    period_doubling,
    thue_morse,
    thue_morse_ones,
)
from .spectral import (
    EPS_EXT,
    EPS_PE,
    THETA_BRAGG,
    SpectrumEntry,
    SpectrumReport,
    bragg_scan,
    classify_wavevector,
    diffraction_amplitude,
    fiber_collision_ladder,
    fiber_collision_sample,
    phase_spread,
    refine_eigenvalue,
    topological_eigenvalue_test,
    torus_coordinates,
)
from .proximal import (
    agreement_radius,
    coincidence_rank,
    column_analysis,
    column_cardinalities,
    proximality_probe,
    substitution_height,
)
