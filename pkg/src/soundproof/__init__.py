"""Structure-preserving integrators for soundproof atmospheric flows.

Boussinesq, anelastic, and pseudo-incompressible models on (optionally
randomly perturbed) triangular channel meshes, discretized so that the
weighted divergence constraint, tracer mass, and total energy behave like
their continuous counterparts: mass to rounding, energy with bounded
oscillation and no drift.

Layout: ``mesh`` (primal/dual geometry), ``models`` (weights, profiles,
energy/mass functionals), ``operators`` (discrete weighted calculus),
``stepper`` (Cayley transport + projected Crank-Nicolson), ``diagnostics``
(probes, spectra, conservation series), ``harness`` (benchmark cases and
checks), ``cli``.
"""

from .mesh import (DualGeometry, Mesh, MeshError, MeshQualityError,
                   MeshQualityReport, accept_perturbed, build_dual,
                   build_equilateral, build_regular, load_mesh,
                   perturb_interior, quality, save_mesh, validate)
from .models import (ANELASTIC, BOUSSINESQ, PSEUDO_INCOMPRESSIBLE, ModelSpec,
                     Profile, WeightSet, const, energies, exp_profile,
                     hydrostatic_deviation, make_anelastic, make_boussinesq,
                     make_pseudo_incompressible, make_weights, mass,
                     pow_profile)
from .operators import (advection, divergence, dense_bracket_residual,
                        edge_value, flat, flux_from_velocity, forcing,
                        gradient, kinetic_density, velocity_from_stream,
                        vorticity)
from .stepper import (SolverError, State, StepReport, StepperConfig,
                      momentum_update, poisson_solve, step, theta_update)
from .harness import (RunConfig, default_config, init_case, load_config,
                      parse_config, run, save_config, serialize_config,
                      simulate)

__version__ = "0.1.0"
