from .params import validate, effective_image_distance
from .mirror_em import (
    gamma_bar_1,
    level_shift,
    radiative_correction,
    intensity_1,
    intensity_2,
    quadrature_total_rate,
    converged_total_rate,
)
from .steady_closed import (
    effective_detunings,
    p3_closed,
    p3_weak_detuning,
    p3_large_detuning,
    modulation_metrics,
    local_visibility,
    is_dark_state,
)
from .lindblad import (
    DensityMatrix3,
    Liouvillian,
    build_hamiltonian,
    build_liouvillian,
    steady_state,
    propagate,
    calibrate_sign,
    reference_sign,
)
from .dicke_equiv import collective_rates, verify_mirror_image

__all__ = [
    'validate', 'effective_image_distance',
    'gamma_bar_1', 'level_shift', 'radiative_correction',
    'intensity_1', 'intensity_2', 'quadrature_total_rate', 'converged_total_rate',
    'effective_detunings', 'p3_closed', 'p3_weak_detuning', 'p3_large_detuning', 'local_visibility',
    'modulation_metrics', 'is_dark_state',
    'DensityMatrix3', 'Liouvillian', 'build_hamiltonian', 'build_liouvillian',
    'steady_state', 'propagate', 'calibrate_sign', 'reference_sign',
    'collective_rates', 'verify_mirror_image',
]
