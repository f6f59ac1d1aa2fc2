"""Probes, spectra, conservation series, symmetry and extrema diagnostics.

Everything here is post-processing: pure functions of recorded fields plus
CSV writers (one-line header, floats at 17 significant digits).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import Mesh
from .models import ModelSpec, energies, mass


class ProbeError(ValueError):
    """Probe outside the domain or unsupported mesh for pairing."""


# --------------------------------------------------------------------------
# point location and probes
# --------------------------------------------------------------------------

def locate_cells(mesh: Mesh, points: np.ndarray) -> np.ndarray:
    """Triangle id containing each (x, z) point; x wraps across the seam."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty(len(pts), dtype=np.int64)
    xy = mesh.tri_xy
    v0, v1, v2 = xy[:, 0], xy[:, 1], xy[:, 2]
    d1, d2 = v1 - v0, v2 - v0
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    eps = 1e-12 * mesh.lx
    for n, (px, pz) in enumerate(pts):
        if not (-eps <= pz <= mesh.lz + eps):
            raise ProbeError(f"probe ({px}, {pz}) outside the channel")
        px = px % mesh.lx
        rx = px - v0[:, 0]
        rx -= mesh.lx * np.round(rx / mesh.lx)   # nearest image per triangle
        rz = pz - v0[:, 1]
        a = (rx * d2[:, 1] - rz * d2[:, 0]) / det
        b = (d1[:, 0] * rz - d1[:, 1] * rx) / det
        tol = 1e-10
        inside = (a >= -tol) & (b >= -tol) & (a + b <= 1 + tol)
        hits = np.nonzero(inside)[0]
        if len(hits) == 0:
            raise ProbeError(f"probe ({px}, {pz}) not inside any triangle")
        out[n] = hits[0]
    return out


@dataclass
class ProbeSeries:
    """Tracer samples at fixed probe positions, one row per recorded step."""

    positions: np.ndarray       # (np, 2)
    cells: np.ndarray           # (np,)
    dt: float                   # sampling interval
    times: list[float] = field(default_factory=list)
    values: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def at(cls, mesh: Mesh, positions, dt: float) -> "ProbeSeries":
        positions = np.atleast_2d(np.asarray(positions, dtype=float))
        return cls(positions=positions, cells=locate_cells(mesh, positions), dt=dt)

    def record(self, t: float, theta: np.ndarray) -> None:
        self.times.append(t)
        self.values.append(theta[self.cells].copy())

    def series(self, probe: int) -> np.ndarray:
        return np.array([v[probe] for v in self.values])

    @property
    def n_probes(self) -> int:
        return len(self.cells)


def default_probe_lattice(lx: float, lz: float) -> np.ndarray:
    """3x3 lattice at quarter points of the domain."""
    xs = [0.25 * lx, 0.5 * lx, 0.75 * lx]
    zs = [0.25 * lz, 0.5 * lz, 0.75 * lz]
    return np.array([(x, z) for z in zs for x in xs])


# --------------------------------------------------------------------------
# spectra
# --------------------------------------------------------------------------

@dataclass
class Spectrum:
    freq: np.ndarray        # cyclic frequency bins, 1/s, spacing 1/(n dt)
    amplitude: np.ndarray   # >= 0, scaled so sum(amplitude^2) = series power

    def power_fraction_below(self, omega_max: float) -> float:
        """Fraction of spectral power at angular frequency <= omega_max."""
        p = self.amplitude ** 2
        total = p.sum()
        if total == 0.0:
            return 1.0
        return float(p[2.0 * np.pi * self.freq <= omega_max].sum() / total)

    def dominant_angular_frequency(self) -> float:
        return float(2.0 * np.pi * self.freq[int(np.argmax(self.amplitude))])


def dft(values: np.ndarray, dt: float, taper: bool = False) -> Spectrum:
    """One-sided amplitude spectrum of the mean-removed series.

    Amplitudes are scaled so that sum(amplitude^2) equals the mean power of
    the series (Parseval, exact without taper); ratios between well-separated
    bins match the input sinusoid amplitude ratios.

    ``taper`` applies a Hann window (power renormalized by the window RMS).
    The plain rectangular window smears a strong off-bin spectral line into
    slowly decaying sidelobes; power-localization checks should use the
    tapered estimate.
    """
    x = np.asarray(values, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two samples")
    n = x.size
    x = x - x.mean()
    scale = float(n)
    if taper:
        w = np.hanning(n)
        x = x * w
        scale = n * np.sqrt(np.mean(w * w))
    xhat = np.fft.rfft(x)
    k = np.arange(len(xhat))
    coef = np.full(len(xhat), np.sqrt(2.0))
    coef[0] = 1.0
    if n % 2 == 0:
        coef[-1] = 1.0
    amp = coef * np.abs(xhat) / scale
    return Spectrum(freq=k[1:] / (n * dt), amplitude=amp[1:])


@dataclass
class DispersionParams:
    """Constants of the analytic dispersion relation w^2 = N^2 kx^2/(k^2+sigma)."""

    n_freq: float
    sigma: float = 0.0


def dispersion_params(model: ModelSpec) -> DispersionParams:
    """N and sigma for exponential reference profiles (constant-coefficient case)."""
    if model.n_freq is None:
        raise ValueError("model has no Brunt-Vaisala frequency set")
    sigma = 0.0
    if model.kind == "anelastic":
        if model.rho_profile is None or model.rho_profile.form != "exp":
            raise ValueError("sigma is constant only for exponential density profiles")
        k = model.rho_profile.params[1]
        sigma = 0.25 * k * k
    elif model.kind == "pseudo_incompressible":
        if (model.rho_profile is None or model.rho_profile.form != "exp"
                or model.theta_profile is None or model.theta_profile.form != "exp"):
            raise ValueError("sigma is constant only for exponential profiles")
        k = model.rho_profile.params[1]
        q = model.theta_profile.params[1]
        sigma = (q + 0.5 * k) ** 2
    return DispersionParams(n_freq=model.n_freq, sigma=sigma)


def dispersion_bound_check(spectra: list[Spectrum], params: DispersionParams,
                           fraction_threshold: float = 0.95,
                           frequency_margin: float = 0.05) -> tuple[bool, float]:
    """Check the internal-wave frequency bound omega <= N on every spectrum.

    Returns (passed, worst power fraction at omega <= (1+margin) N).
    """
    if not spectra:
        raise ValueError("no spectra given")
    omega_max = (1.0 + frequency_margin) * params.n_freq
    fracs = [s.power_fraction_below(omega_max) for s in spectra]
    worst = min(fracs)
    return worst >= fraction_threshold, worst


# --------------------------------------------------------------------------
# conservation series
# --------------------------------------------------------------------------

@dataclass
class ConservationSeries:
    t: np.ndarray
    e_kin: np.ndarray
    e_pot: np.ndarray
    rel_energy: np.ndarray     # E_tot/E_tot(0) - 1 (absolute error if E0 == 0)
    rel_mass: np.ndarray
    absolute_energy: bool = False
    absolute_mass: bool = False

    def energy_drift_rate(self) -> float:
        """Least-squares linear slope of the relative energy error per time."""
        t = self.t - self.t.mean()
        denom = float(t @ t)
        return float(t @ self.rel_energy / denom) if denom > 0 else 0.0

    def energy_amplitude(self) -> float:
        return float(np.max(np.abs(self.rel_energy)))

    def mass_amplitude(self) -> float:
        return float(np.max(np.abs(self.rel_mass)))


def conservation_series(model: ModelSpec, times, vs, thetas) -> ConservationSeries:
    """Relative energy/mass errors of a recorded (V, Theta) trajectory."""
    rows = [energies(model, v, th) for v, th in zip(vs, thetas)]
    e = np.array([r[2] for r in rows])
    ek = np.array([r[0] for r in rows])
    ep = np.array([r[1] for r in rows])
    m = np.array([mass(model, th) for th in thetas])
    abs_e = e[0] == 0.0
    abs_m = m[0] == 0.0
    rel_e = e - e[0] if abs_e else e / e[0] - 1.0
    rel_m = m - m[0] if abs_m else m / m[0] - 1.0
    return ConservationSeries(t=np.asarray(times, dtype=float), e_kin=ek, e_pot=ep,
                              rel_energy=rel_e, rel_mass=rel_m,
                              absolute_energy=abs_e, absolute_mass=abs_m)


# --------------------------------------------------------------------------
# symmetry and extrema
# --------------------------------------------------------------------------

def mirror_pairing(mesh: Mesh, x_c: float) -> np.ndarray:
    """cell -> mirror cell map for reflection about x = x_c (regular meshes)."""
    cen = mesh.tri_centroid
    key = {}
    scale = max(mesh.fx, mesh.fz)
    for t in range(mesh.n_cells):
        k = (round(cen[t, 0] / scale * 1e6), round(cen[t, 1] / scale * 1e6))
        key[k] = t
    pair = np.empty(mesh.n_cells, dtype=np.int64)
    for t in range(mesh.n_cells):
        mx = np.mod(2.0 * x_c - cen[t, 0], mesh.lx)
        k = (round(mx / scale * 1e6), round(cen[t, 1] / scale * 1e6))
        if k not in key:
            raise ProbeError(f"no mirror cell for {t}: mesh not symmetric about x={x_c}")
        pair[t] = key[k]
    return pair


def symmetry_error(theta: np.ndarray, mesh: Mesh, x_c: float) -> float:
    """max |Theta(cell) - Theta(mirror cell)| about the vertical line x = x_c."""
    pair = mirror_pairing(mesh, x_c)
    return float(np.max(np.abs(theta - theta[pair])))


def extrema(theta: np.ndarray) -> tuple[float, float, int]:
    return float(theta.min()), float(theta.max()), int(np.argmax(theta))


def weighted_centroid_height(theta_anomaly: np.ndarray, mesh: Mesh) -> float:
    """Anomaly-weighted mean height, sum(area*theta'*z)/sum(area*theta')."""
    w = mesh.tri_area * theta_anomaly
    return float(w @ mesh.tri_centroid[:, 1] / w.sum())


# --------------------------------------------------------------------------
# CSV output
# --------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def dump_cell_field(path: str, mesh: Mesh, values: np.ndarray, name: str = "value") -> None:
    rows = ((i, mesh.tri_centroid[i, 0], mesh.tri_centroid[i, 1], values[i])
            for i in range(mesh.n_cells))
    write_csv(path, ["cell_id", "x", "z", name], rows)


def dump_edge_field(path: str, mesh: Mesh, values: np.ndarray, name: str = "value") -> None:
    rows = ((e, mesh.edge_mid[e, 0], mesh.edge_mid[e, 1], values[e])
            for e in range(mesh.n_edges))
    write_csv(path, ["edge_id", "x_mid", "z_mid", name], rows)
