"""Numerical toolkit for static Maxwell-Dirac fields in spinor form."""
from .errors import *  # noqa: F401,F403
from .grids import (AxiPotentialGrid, PhysicalConstants, SpinorPoint, StaticFieldGrid,
                    gauss_theta, read_axipot, read_grid, read_samples, write_axipot,
                    write_grid, write_samples)
from .spinor import (Dyad, NullTetrad, current, dyad_from_angles, null_tetrad,
                     potential_static, reality_residuals, v_field)
from .weighted import (DecayFit, ExteriorDomain, WeightedNormSpec, decay_exponent_fit,
                       multiplication_bound_check, sobolev_inequality_check,
                       weighted_lp_norm, weighted_sobolev_norm)
from .spherical import (FluxSeries, RadialSolution, ShootingConfig, asymptotic_tail,
                        neutrality_flux, read_radial, reduce_spherical, solve_spherical,
                        tail_fits, write_radial)
from .axisym import (ChargeReport, MonopoleLedger, boundedness_check_P, coulomb_extract,
                     electric_charge, lorenz_gauge_residual, magnetic_charge,
                     monopole_ledger, monopole_limit, stationarity_check_axisym,
                     tau_from_chi, vector_potential_axisym)

__version__ = "0.1.0"
