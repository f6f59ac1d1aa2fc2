"""Model specifications: weighted volumes, reference profiles, energy and mass.

A ModelSpec fixes one of the three soundproof systems on a given mesh:

* ``boussinesq``: plain cell areas, prognostic buoyancy B.
* ``anelastic``: cell volumes weighted by the reference density rho(z),
  prognostic potential temperature Theta, reference Exner pressure Pi(z).
* ``pseudo_incompressible``: volumes weighted by rho(z)*theta(z).

Weighted volumes default to midpoint sampling of the profile at cell
centroids; exact integration over each triangle is available for exponential
profiles (``exact=True``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mesh import DualGeometry, Mesh, build_dual

BOUSSINESQ = "boussinesq"
ANELASTIC = "anelastic"
PSEUDO_INCOMPRESSIBLE = "pseudo_incompressible"
KINDS = (BOUSSINESQ, ANELASTIC, PSEUDO_INCOMPRESSIBLE)


# --------------------------------------------------------------------------
# reference profiles
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Profile:
    """Named analytic profile of z: const(v), exp(a,k)=a*e^(k z),
    pow(b,p)=(1 - b*z/lz)^p, lin(a,b)=a + b*z."""

    form: str
    params: tuple
    lz: float = 0.0

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if self.form == "const":
            return np.full_like(z, self.params[0])
        if self.form == "exp":
            a, k = self.params
            return a * np.exp(k * z)
        if self.form == "pow":
            b, p = self.params
            return (1.0 - b * z / self.lz) ** p
        if self.form == "lin":
            a, b = self.params
            return a + b * z
        raise ValueError(f"unknown profile form {self.form!r}")

    def serialize(self) -> str:
        return f"{self.form}:" + ",".join(f"{p:.17g}" for p in self.params)

    @staticmethod
    def parse(text: str, lz: float = 0.0) -> "Profile":
        form, _, rest = text.partition(":")
        params = tuple(float(p) for p in rest.split(",")) if rest else ()
        return Profile(form, params, lz)


def const(v: float) -> Profile:
    return Profile("const", (float(v),))


def exp_profile(a: float, k: float) -> Profile:
    return Profile("exp", (float(a), float(k)))


def pow_profile(b: float, p: float, lz: float) -> Profile:
    return Profile("pow", (float(b), float(p)), lz)


# --------------------------------------------------------------------------
# weights
# --------------------------------------------------------------------------

@dataclass
class WeightSet:
    """Per-cell weighted volumes and the per-edge factors derived from them.

    sbar_i    = vol_i / area_i         (cell mean of the weight)
    rhohat_ij = (sbar_i + sbar_j) / 2
    sigma_ij  = (rhohat_ij / 2) (1/sbar_i + 1/sbar_j)   >= 1
    """

    vol: np.ndarray      # (nt,) weighted volume, > 0
    sbar: np.ndarray     # (nt,)
    rhohat: np.ndarray   # (ne,)
    sigma: np.ndarray    # (ne,)


def make_weights(mesh: Mesh, weight_fn=None, exact_exp_k: float | None = None,
                 exact_exp_a: float = 1.0) -> WeightSet:
    """WeightSet from a weight profile (None means unweighted, all ones).

    ``exact_exp_k`` switches to the exact triangle integral of a*e^(k z)
    instead of midpoint sampling.
    """
    area = mesh.tri_area
    if exact_exp_k is not None:
        vol = exact_exp_a * _tri_integral_exp(mesh, exact_exp_k)
    elif weight_fn is None:
        vol = area.copy()
    else:
        w = np.asarray(weight_fn(mesh.tri_centroid[:, 1]), dtype=float)
        if np.any(w <= 0):
            raise ValueError("weight profile must be strictly positive on the domain")
        vol = w * area
    if np.any(vol <= 0):
        raise ValueError("weighted volumes must be positive")
    sbar = vol / area
    ci, cj = mesh.edge_cells[:, 0], mesh.edge_cells[:, 1]
    rhohat = 0.5 * (sbar[ci] + sbar[cj])
    sigma = 0.5 * rhohat * (1.0 / sbar[ci] + 1.0 / sbar[cj])
    return WeightSet(vol=vol, sbar=sbar, rhohat=rhohat, sigma=sigma)


def _tri_integral_exp(mesh: Mesh, k: float) -> np.ndarray:
    """Exact integral of e^(k z) over each triangle (Green's theorem)."""
    out = np.zeros(mesh.n_cells)
    xy = mesh.tri_xy
    for s in range(3):
        x1, z1 = xy[:, s, 0], xy[:, s, 1]
        x2, z2 = xy[:, (s + 1) % 3, 0], xy[:, (s + 1) % 3, 1]
        dz = z2 - z1
        # int exp(k z) dt along the side, stable for dz -> 0
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(np.abs(k * dz) > 1e-12,
                             (np.exp(k * z2) - np.exp(k * z1)) / (k * dz),
                             np.exp(0.5 * k * (z1 + z2)))
        out += -(x2 - x1) / k * ratio
    return out


# --------------------------------------------------------------------------
# model specification
# --------------------------------------------------------------------------

@dataclass
class ModelSpec:
    kind: str
    mesh: Mesh
    dual: DualGeometry
    weights: WeightSet
    z: np.ndarray                        # (nt,) cell-center height
    pibar: np.ndarray | None = None      # (nt,) Exner reference (anelastic)
    rho_c: np.ndarray | None = None      # (nt,) cell samples of rho(z)
    theta_c: np.ndarray | None = None    # (nt,) cell samples of theta(z)
    g: float = 1.0
    cp: float = 1.0
    theta0: float = 1.0
    n_freq: float | None = None          # Brunt-Vaisala frequency, 1/s
    rho_profile: Profile | None = None
    theta_profile: Profile | None = None
    _ops: object = field(default=None, repr=False)

    @property
    def ops(self):
        if self._ops is None:
            from .operators import ModelOps
            self._ops = ModelOps(self.mesh, self.dual, self.weights)
        return self._ops


def make_boussinesq(mesh: Mesh, dual: DualGeometry | None = None,
                    g: float = 1.0, theta0: float = 1.0,
                    n_freq: float | None = 1.0) -> ModelSpec:
    dual = dual if dual is not None else build_dual(mesh)
    w = make_weights(mesh, None)
    return ModelSpec(kind=BOUSSINESQ, mesh=mesh, dual=dual, weights=w,
                     z=mesh.tri_centroid[:, 1].copy(), g=g, theta0=theta0,
                     n_freq=n_freq)


def make_anelastic(mesh: Mesh, rho: Profile, theta: Profile, cp: float, g: float,
                   pibar: Profile, dual: DualGeometry | None = None,
                   n_freq: float | None = None, exact: bool = False) -> ModelSpec:
    dual = dual if dual is not None else build_dual(mesh)
    zc = mesh.tri_centroid[:, 1]
    _check_positive(rho, mesh.lz, "rho")
    if exact and rho.form == "exp":
        w = make_weights(mesh, rho, exact_exp_k=rho.params[1], exact_exp_a=rho.params[0])
    else:
        w = make_weights(mesh, rho)
    return ModelSpec(kind=ANELASTIC, mesh=mesh, dual=dual, weights=w,
                     z=zc.copy(), pibar=np.asarray(pibar(zc), dtype=float),
                     rho_c=rho(zc), theta_c=theta(zc), g=g, cp=cp,
                     n_freq=n_freq, rho_profile=rho, theta_profile=theta)


def make_pseudo_incompressible(mesh: Mesh, rho: Profile, theta: Profile, g: float,
                               dual: DualGeometry | None = None,
                               n_freq: float | None = None,
                               exact: bool = False) -> ModelSpec:
    dual = dual if dual is not None else build_dual(mesh)
    zc = mesh.tri_centroid[:, 1]
    _check_positive(rho, mesh.lz, "rho")
    _check_positive(theta, mesh.lz, "theta")
    if exact and rho.form == "exp" and theta.form == "exp":
        a = rho.params[0] * theta.params[0]
        k = rho.params[1] + theta.params[1]
        w = make_weights(mesh, None, exact_exp_k=k, exact_exp_a=a)
    else:
        w = make_weights(mesh, lambda z: rho(z) * theta(z))
    return ModelSpec(kind=PSEUDO_INCOMPRESSIBLE, mesh=mesh, dual=dual, weights=w,
                     z=zc.copy(), rho_c=rho(zc), theta_c=theta(zc), g=g,
                     n_freq=n_freq, rho_profile=rho, theta_profile=theta)


def _check_positive(profile: Profile, lz: float, name: str) -> None:
    zs = np.linspace(0.0, lz, 257)
    if np.any(profile(zs) <= 0):
        raise ValueError(f"{name} profile not strictly positive on [0, {lz}]")


# --------------------------------------------------------------------------
# functionals
# --------------------------------------------------------------------------

def kinetic_energy(model: ModelSpec, V: np.ndarray) -> float:
    from .operators import kinetic_density
    k = kinetic_density(V, model.ops)
    if model.kind == PSEUDO_INCOMPRESSIBLE:
        raise RuntimeError("use energies() for pseudo-incompressible (needs Theta)")
    return float(np.dot(model.weights.vol, k))


def energies(model: ModelSpec, V: np.ndarray, theta: np.ndarray) -> tuple[float, float, float]:
    """(E_kin, E_pot, E_tot) for the model's conserved energy functional."""
    from .operators import kinetic_density
    k = kinetic_density(V, model.ops)
    w = model.weights.vol
    if model.kind == BOUSSINESQ:
        ek = float(np.dot(w, k))
        ep = -float(np.dot(w * theta, model.z))
    elif model.kind == ANELASTIC:
        ek = float(np.dot(w, k))
        ep = model.cp * float(np.dot(w * model.pibar, theta))
    elif model.kind == PSEUDO_INCOMPRESSIBLE:
        if np.any(theta <= 0):
            raise ValueError("pseudo-incompressible Theta must stay positive")
        ek = float(np.dot(w, k / theta))
        ep = model.g * float(np.dot(w, model.z / theta))
    else:
        raise ValueError(model.kind)
    return ek, ep, ek + ep


def mass(model: ModelSpec, theta: np.ndarray) -> float:
    """Weighted tracer integral, conserved exactly by the transport step."""
    return float(np.dot(model.weights.vol, theta))


def discrete_lagrangian(model: ModelSpec, V: np.ndarray, theta: np.ndarray) -> float:
    """Value of the discrete Lagrangian (kinetic minus potential term)."""
    ek, ep, _ = energies(model, V, theta)
    return ek - ep


def hydrostatic_deviation(model: ModelSpec) -> float:
    """Max relative deviation of cp*theta_mid*(dPi/dz) from -g on steep edges.

    Only meaningful for anelastic specs carrying Pi and theta samples.
    """
    if model.pibar is None or model.theta_c is None:
        raise ValueError("hydrostatic check needs anelastic pibar/theta samples")
    mesh = model.mesh
    ci, cj = mesh.edge_cells[:, 0], mesh.edge_cells[:, 1]
    dz = model.z[cj] - model.z[ci]
    steep = np.abs(dz) > 0.2 * mesh.fz
    tmid = 0.5 * (model.theta_c[ci] + model.theta_c[cj])
    lhs = model.cp * tmid[steep] * (model.pibar[cj] - model.pibar[ci])[steep] / dz[steep]
    return float(np.max(np.abs(lhs + model.g) / model.g))
