"""Acoustic modes of circular ducts with locally reacting walls.

Transverse eigenvalues, exceptional points (Cremer optima), modal
nonorthogonality and rigid-to-lined junction power.
"""

__version__ = "0.1.0"

from .eigensolver import (  # noqa: E402
    BoundarySpec,
    Mode,
    ModeClass,
    ModeSet,
    axial_wavenumber,
    classify,
    find_modes,
    rigid_modes,
    track_path,
)
from .ep_locator import (  # noqa: E402
    EpRecord,
    TwoLevelModel,
    encircle_ep,
    enumerate_eps,
    find_ep,
    local_expansion,
    two_level_eigen,
)
from .junction import JunctionSolution, coupling_matrix, incident_amplitudes, pressure_field, solve_junction  # noqa: E402
from .nonortho import (  # noqa: E402
    NonorthReport,
    OverlapMatrix,
    kp,
    left_eigenfunction,
    mutual_overlap,
    normalization,
    self_overlap,
    sij_matrix,
)
from .power import PowerProfile, modal_decay_rates, power_profile  # noqa: E402
from .special_fn import (  # noqa: E402
    bessel_j,
    bessel_j_prime,
    dispersion_lhs,
    lommel_cross,
    lommel_self,
    quad_overlap,
)
from .sweeps import GridResult, Quantity, sweep  # noqa: E402
