"""Benchmark cases, run configuration, and orchestration.

Five canonical cases:

* ``hydro_boussinesq`` / ``hydro_anelastic`` / ``hydro_pi``: hydrostatic
  adjustment of a stratified channel after a localized disturbance; emits
  internal gravity waves whose spectra stay below the buoyancy frequency.
* ``warm_bubble``: rising thermal in a dry-atmosphere stratification
  (anelastic or pseudo-incompressible), 20 km x 10 km.
* ``cold_bubble``: dense falling drop at laboratory scale, 20 m x 10 m.

Configs serialize to an INI-style text file (flat key per line, sections)
and round-trip exactly (floats at 17 significant digits).
"""

from __future__ import annotations

import configparser
import dataclasses
import io
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics as dg
from .mesh import (Mesh, MeshError, accept_perturbed, build_dual, build_regular,
                   save_mesh)
from .models import (ANELASTIC, BOUSSINESQ, PSEUDO_INCOMPRESSIBLE, ModelSpec,
                     Profile, const, energies, exp_profile, make_anelastic,
                     make_boussinesq, make_pseudo_incompressible, mass,
                     pow_profile)
from .stepper import SolverError, State, StepperConfig, step

CASES = ("hydro_boussinesq", "hydro_anelastic", "hydro_pi",
         "warm_bubble", "cold_bubble")


class ConfigError(ValueError):
    """Invalid or incomplete run configuration."""


@dataclass
class RunConfig:
    case: str
    kind: str
    # mesh
    nx: int
    nz: int
    lx: float
    lz: float
    perturb_c: float = 0.0
    mesh_seed: int = 0
    max_dh: float = 0.0            # 0 disables the quality cap
    # time
    dt: float = 0.25
    t_end: float = 100.0
    # case parameters
    n_freq: float = 1.0            # Brunt-Vaisala frequency (adjustment cases)
    r0_frac: float = 0.2           # disturbance radius / lz
    beta_frac: float = 0.3         # disturbance amplitude / lz
    prof_offset: float = -1.0      # c in theta_bar = e^(z+c)
    rho_k: float = -1.0            # density profile exponent
    delta_theta: float = 2.0       # bubble amplitude, K
    bubble_l: float = 10000.0      # bubble length scale L, m
    z_off_frac: float = 0.03       # bubble center offset / L
    theta_bar0: float = 300.0      # constant background, K
    # constants
    g: float = 1.0
    cp: float = 1.0
    theta0: float = 1.0
    gas_r: float = 287.0
    gamma: float = 1.4
    p_ref: float = 1.0e5
    # probes / output
    probes: tuple = ()             # ((x, z), ...); empty means default lattice
    record_every: int = 1
    snapshot_times: tuple = ()
    out_dir: str = "out"
    # solver
    fp_tol: float = 1e-10
    fp_max_iter: int = 100
    poisson_tol: float = 1e-12
    poisson_max_iter: int = 20000

    def validate(self) -> None:
        if self.case not in CASES:
            raise ConfigError(f"unknown case {self.case!r}")
        if self.kind not in (BOUSSINESQ, ANELASTIC, PSEUDO_INCOMPRESSIBLE):
            raise ConfigError(f"unknown model kind {self.kind!r}")
        if self.case == "hydro_boussinesq" and self.kind != BOUSSINESQ:
            raise ConfigError("hydro_boussinesq runs the boussinesq model")
        if self.case == "hydro_anelastic" and self.kind != ANELASTIC:
            raise ConfigError("hydro_anelastic runs the anelastic model")
        if self.case == "hydro_pi" and self.kind != PSEUDO_INCOMPRESSIBLE:
            raise ConfigError("hydro_pi runs the pseudo-incompressible model")
        if self.case in ("warm_bubble", "cold_bubble") and self.kind == BOUSSINESQ:
            raise ConfigError("bubble cases need anelastic or pseudo-incompressible")
        if self.dt <= 0 or self.t_end <= 0:
            raise ConfigError("dt and t_end must be positive")
        steps = self.t_end / self.dt
        if abs(steps - round(steps)) > 1e-9:
            raise ConfigError("t_end must be an integer multiple of dt")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def probe_positions(self) -> np.ndarray:
        if self.probes:
            return np.array(self.probes, dtype=float)
        return dg.default_probe_lattice(self.lx, self.lz)


# --------------------------------------------------------------------------
# config files
# --------------------------------------------------------------------------

_SECTIONS = {
    "run": ("case", "kind"),
    "mesh": ("nx", "nz", "lx", "lz", "perturb_c", "mesh_seed", "max_dh"),
    "time": ("dt", "t_end"),
    "case": ("n_freq", "r0_frac", "beta_frac", "prof_offset", "rho_k",
             "delta_theta", "bubble_l", "z_off_frac", "theta_bar0",
             "g", "cp", "theta0", "gas_r", "gamma", "p_ref"),
    "output": ("probes", "record_every", "snapshot_times", "out_dir"),
    "solver": ("fp_tol", "fp_max_iter", "poisson_tol", "poisson_max_iter"),
}


def _to_text(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return ";".join(f"{x:.17g},{z:.17g}" for x, z in value)
        return ";".join(f"{v:.17g}" for v in value)
    return str(value)


def serialize_config(cfg: RunConfig) -> str:
    cp_ = configparser.ConfigParser()
    for section, keys in _SECTIONS.items():
        cp_[section] = {k: _to_text(getattr(cfg, k)) for k in keys}
    buf = io.StringIO()
    cp_.write(buf)
    return buf.getvalue()


def parse_config(text: str) -> RunConfig:
    cp_ = configparser.ConfigParser()
    cp_.read_string(text)
    kwargs = {}
    hints = {f.name: f.type for f in dataclasses.fields(RunConfig)}
    for section, keys in _SECTIONS.items():
        if section not in cp_:
            raise ConfigError(f"missing section [{section}]")
        for k in keys:
            if k not in cp_[section]:
                raise ConfigError(f"missing key {k!r} in [{section}]")
            raw = cp_[section][k]
            hint = hints[k]
            if hint == "int":
                kwargs[k] = int(raw)
            elif hint == "float":
                kwargs[k] = float(raw)
            elif k == "probes":
                kwargs[k] = tuple(
                    tuple(float(p) for p in item.split(","))
                    for item in raw.split(";") if item.strip())
            elif k == "snapshot_times":
                kwargs[k] = tuple(float(v) for v in raw.split(";") if v.strip())
            else:
                kwargs[k] = raw
    cfg = RunConfig(**kwargs)
    cfg.validate()
    return cfg


def save_config(cfg: RunConfig, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(serialize_config(cfg))


def load_config(path: str) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())


# --------------------------------------------------------------------------
# default configurations
# --------------------------------------------------------------------------

def default_config(case: str, kind: str | None = None, desk: bool = False) -> RunConfig:
    """Published-scale defaults per case; ``desk=True`` shrinks to test scale.

    Desk adjustment meshes keep the published cell aspect f_z/f_x = 0.8 by
    shortening the channel (a 2*96x10 mesh on 24x1 m would be obtuse, with a
    degenerate circumcentric dual).
    """
    if case == "hydro_boussinesq":
        cfg = RunConfig(case=case, kind=BOUSSINESQ, nx=384, nz=20, lx=24.0, lz=1.0,
                        dt=0.25, t_end=100.0, beta_frac=0.3,
                        snapshot_times=(5.0, 8.0))
        if desk:
            cfg.nx, cfg.nz, cfg.lx = 96, 10, 12.0
    elif case in ("hydro_anelastic", "hydro_pi"):
        kind_ = ANELASTIC if case == "hydro_anelastic" else PSEUDO_INCOMPRESSIBLE
        cfg = RunConfig(case=case, kind=kind_, nx=384, nz=20, lx=24.0, lz=1.0,
                        dt=0.25, t_end=100.0, beta_frac=0.2, rho_k=-1.0,
                        snapshot_times=(5.0, 8.0))
        cfg.prof_offset = -cfg.lz
        if desk:
            cfg.nx, cfg.nz, cfg.lx = 96, 10, 12.0
    elif case == "warm_bubble":
        cfg = RunConfig(case=case, kind=kind or ANELASTIC,
                        nx=321, nz=186, lx=20000.0, lz=10000.0,
                        dt=2.5, t_end=1000.0, delta_theta=2.0,
                        bubble_l=10000.0, z_off_frac=0.03, theta_bar0=300.0,
                        g=10.0, cp=1000.0, snapshot_times=(1000.0,))
        if desk:
            cfg.nx, cfg.nz, cfg.t_end = 80, 46, 500.0
            cfg.snapshot_times = (500.0,)
    elif case == "cold_bubble":
        cfg = RunConfig(case=case, kind=kind or ANELASTIC,
                        nx=321, nz=186, lx=20.0, lz=10.0,
                        dt=0.0125, t_end=1.5, delta_theta=30.0,
                        bubble_l=10.0, z_off_frac=-0.02, theta_bar0=300.0,
                        g=10.0, cp=1000.0, snapshot_times=(1.5,))
        if desk:
            cfg.nx, cfg.nz = 80, 46
    else:
        raise ConfigError(f"unknown case {case!r}")
    if kind is not None:
        cfg.kind = kind
    cfg.validate()
    return cfg


# --------------------------------------------------------------------------
# initializers
# --------------------------------------------------------------------------

def make_mesh(cfg: RunConfig) -> tuple[Mesh, object, int]:
    """Mesh per config; perturbed meshes revalidate with reseeding.

    Returns (mesh, dual, rejections).
    """
    base = build_regular(cfg.nx, cfg.nz, cfg.lx, cfg.lz)
    if cfg.perturb_c == 0.0:
        return base, build_dual(base), 0
    cap = cfg.max_dh if cfg.max_dh > 0 else None
    mesh, dual, _, rejections = accept_perturbed(base, cfg.perturb_c, cfg.mesh_seed,
                                                 max_dh=cap)
    return mesh, dual, rejections


def _bump(x, z, xc, zc, r0, amp):
    """Compactly supported disturbance amp*exp(-r0^2/(r0^2-r^2)) inside r < r0."""
    r2 = (x - xc) ** 2 + (z - zc) ** 2
    inside = r2 < r0 * r0
    safe = np.where(inside, r0 * r0 - r2, 1.0)
    return np.where(inside, amp * np.exp(-r0 * r0 / safe), 0.0)


def init_hydro_boussinesq(cfg: RunConfig, mesh: Mesh, dual) -> tuple[ModelSpec, State]:
    """Stratified rest state plus a localized positive buoyancy disturbance.

    The reference buoyancy is +N^2 z (the stable stratification for the
    buoyancy functional used here), the disturbance a compact bump of
    amplitude N^2 beta at the domain center.
    """
    model = make_boussinesq(mesh, dual, g=cfg.g, theta0=cfg.theta0, n_freq=cfg.n_freq)
    x, z = mesh.tri_centroid[:, 0], mesh.tri_centroid[:, 1]
    n2 = cfg.n_freq ** 2
    r0 = cfg.r0_frac * cfg.lz
    beta = cfg.beta_frac * cfg.lz
    b = n2 * (z + _bump(x, z, 0.5 * cfg.lx, 0.5 * cfg.lz, r0, beta))
    return model, State(V=np.zeros(mesh.n_edges), theta=b)


def _hydro_theta(cfg: RunConfig, mesh: Mesh) -> np.ndarray:
    x, z = mesh.tri_centroid[:, 0], mesh.tri_centroid[:, 1]
    r0 = cfg.r0_frac * cfg.lz
    beta = cfg.beta_frac * cfg.lz
    theta = np.exp(z + cfg.prof_offset) - _bump(x, z, 0.5 * cfg.lx, 0.5 * cfg.lz, r0, beta)
    if np.any(theta <= 0):
        raise ConfigError("disturbance drives Theta nonpositive")
    return theta


def init_hydro_anelastic(cfg: RunConfig, mesh: Mesh, dual) -> tuple[ModelSpec, State]:
    """Exponentially stratified rest state with a negative Theta disturbance.

    theta_bar = e^(z+c), rho_bar = e^(k z); the Exner reference
    (g/cp) e^-(z+c) satisfies the hydrostatic relation analytically.
    """
    rho = exp_profile(1.0, cfg.rho_k)
    theta_bar = exp_profile(math.exp(cfg.prof_offset), 1.0)
    pibar = exp_profile((cfg.g / cfg.cp) * math.exp(-cfg.prof_offset), -1.0)
    model = make_anelastic(mesh, rho, theta_bar, cp=cfg.cp, g=cfg.g, pibar=pibar,
                           dual=dual, n_freq=cfg.n_freq)
    return model, State(V=np.zeros(mesh.n_edges), theta=_hydro_theta(cfg, mesh))


def init_hydro_pi(cfg: RunConfig, mesh: Mesh, dual) -> tuple[ModelSpec, State]:
    rho = exp_profile(1.0, cfg.rho_k)
    theta_bar = exp_profile(math.exp(cfg.prof_offset), 1.0)
    model = make_pseudo_incompressible(mesh, rho, theta_bar, g=cfg.g, dual=dual,
                                       n_freq=cfg.n_freq)
    return model, State(V=np.zeros(mesh.n_edges), theta=_hydro_theta(cfg, mesh))


def _bubble_radius(cfg: RunConfig, x, z):
    dx = (x - 0.5 * cfg.lx) / cfg.bubble_l
    dz = (z - 0.5 * cfg.lz) / cfg.bubble_l + cfg.z_off_frac
    return 5.0 * np.sqrt(dx * dx + dz * dz)


def _bubble_model(cfg: RunConfig, mesh: Mesh, dual) -> ModelSpec:
    rho = pow_profile(0.3, 1.0 / (cfg.gamma - 1.0), cfg.lz)
    theta_bar = const(cfg.theta_bar0)
    if cfg.kind == ANELASTIC:
        pibar = Profile("lin", (0.0, -cfg.g / (cfg.cp * cfg.theta_bar0)))
        return make_anelastic(mesh, rho, theta_bar, cp=cfg.cp, g=cfg.g,
                              pibar=pibar, dual=dual)
    return make_pseudo_incompressible(mesh, rho, theta_bar, g=cfg.g, dual=dual)


def init_warm_bubble(cfg: RunConfig, mesh: Mesh, dual) -> tuple[ModelSpec, State]:
    """Klein-style rising thermal: +delta_theta cos^2(pi r / 2) inside r <= 1."""
    model = _bubble_model(cfg, mesh, dual)
    x, z = mesh.tri_centroid[:, 0], mesh.tri_centroid[:, 1]
    r = _bubble_radius(cfg, x, z)
    theta = cfg.theta_bar0 + np.where(
        r <= 1.0, cfg.delta_theta * np.cos(0.5 * np.pi * np.minimum(r, 1.0)) ** 2, 0.0)
    return model, State(V=np.zeros(mesh.n_edges), theta=theta)


def init_cold_bubble(cfg: RunConfig, mesh: Mesh, dual) -> tuple[ModelSpec, State]:
    """Falling cold drop: -delta_theta/2 (1 + cos(pi r^2)) inside r <= 1."""
    if cfg.delta_theta >= cfg.theta_bar0:
        raise ConfigError("delta_theta >= background drives Theta nonpositive")
    model = _bubble_model(cfg, mesh, dual)
    x, z = mesh.tri_centroid[:, 0], mesh.tri_centroid[:, 1]
    r = _bubble_radius(cfg, x, z)
    theta = cfg.theta_bar0 - np.where(
        r <= 1.0, 0.5 * cfg.delta_theta * (1.0 + np.cos(np.pi * np.minimum(r, 1.0) ** 2)), 0.0)
    return model, State(V=np.zeros(mesh.n_edges), theta=theta)


_INITIALIZERS = {
    "hydro_boussinesq": init_hydro_boussinesq,
    "hydro_anelastic": init_hydro_anelastic,
    "hydro_pi": init_hydro_pi,
    "warm_bubble": init_warm_bubble,
    "cold_bubble": init_cold_bubble,
}


def init_case(cfg: RunConfig) -> tuple[ModelSpec, State, int]:
    cfg.validate()
    mesh, dual, rejections = make_mesh(cfg)
    model, state = _INITIALIZERS[cfg.case](cfg, mesh, dual)
    return model, state, rejections


# --------------------------------------------------------------------------
# simulation driver
# --------------------------------------------------------------------------

@dataclass
class RunResult:
    cfg: RunConfig
    model: ModelSpec
    times: np.ndarray
    conservation: dg.ConservationSeries
    probes: dg.ProbeSeries
    fp_iters: np.ndarray
    max_div: np.ndarray
    final: State
    snapshots: dict          # time -> (V, theta)
    states: list | None = None
    mesh_rejections: int = 0


def simulate(cfg: RunConfig, keep_states: bool = False,
             progress=None) -> RunResult:
    """Run the configured case in memory."""
    model, state, rejections = init_case(cfg)
    scfg = StepperConfig(dt=cfg.dt, fp_tol=cfg.fp_tol, fp_max_iter=cfg.fp_max_iter,
                         poisson_tol=cfg.poisson_tol, poisson_max_iter=cfg.poisson_max_iter)
    probes = dg.ProbeSeries.at(model.mesh, cfg.probe_positions(),
                               cfg.dt * cfg.record_every)
    probes.record(state.t, state.theta)

    times = [state.t]
    vs = [state.V.copy()]
    thetas = [state.theta.copy()]
    fp_iters = [0]
    max_div = [0.0]
    snap_steps = {int(round(t / cfg.dt)): t for t in cfg.snapshot_times}
    snapshots = {}
    states = [state.copy()] if keep_states else None

    for n in range(1, cfg.n_steps + 1):
        state, report = step(state, model, scfg)
        times.append(state.t)
        vs.append(state.V.copy())
        thetas.append(state.theta.copy())
        fp_iters.append(report.fp_iters)
        max_div.append(report.max_div)
        if n % cfg.record_every == 0:
            probes.record(state.t, state.theta)
        if n in snap_steps:
            snapshots[snap_steps[n]] = (state.V.copy(), state.theta.copy())
        if keep_states:
            states.append(state.copy())
        if progress is not None:
            progress(n, cfg.n_steps, report)

    cons = dg.conservation_series(model, times, vs, thetas)
    return RunResult(cfg=cfg, model=model, times=np.asarray(times),
                     conservation=cons, probes=probes,
                     fp_iters=np.asarray(fp_iters), max_div=np.asarray(max_div),
                     final=state, snapshots=snapshots, states=states,
                     mesh_rejections=rejections)


def write_outputs(result: RunResult, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    cfg, cons = result.cfg, result.conservation
    save_mesh(result.model.mesh, os.path.join(out_dir, "mesh.txt"))
    save_config(cfg, os.path.join(out_dir, "config.ini"))

    rows = zip(cons.t, cons.e_kin, cons.e_pot, cons.rel_energy, cons.rel_mass,
               result.fp_iters, result.max_div)
    dg.write_csv(os.path.join(out_dir, "diagnostics.csv"),
                 ["t", "E_k", "E_p", "relE", "relM", "fp_iters", "max_div"], rows)

    with open(os.path.join(out_dir, "probes.csv"), "w") as fh:
        fh.write("t,probe_id,value\n")
        for t, vals in zip(result.probes.times, result.probes.values):
            for p, v in enumerate(vals):
                fh.write(f"{t:.17g},{p},{v:.17g}\n")

    spec_rows = []
    for p in range(result.probes.n_probes):
        s = dg.dft(result.probes.series(p), result.probes.dt)
        spec_rows.extend((p, f_, a_) for f_, a_ in zip(s.freq, s.amplitude))
    dg.write_csv(os.path.join(out_dir, "spectrum.csv"),
                 ["probe_id", "freq", "amplitude"], spec_rows)

    for t, (v, theta) in sorted(result.snapshots.items()):
        tag = f"{t:g}".replace(".", "p")
        dg.dump_cell_field(os.path.join(out_dir, f"theta_t{tag}.csv"),
                           result.model.mesh, theta, "theta")
        dg.dump_edge_field(os.path.join(out_dir, f"velocity_t{tag}.csv"),
                           result.model.mesh, v, "V")


def run(cfg: RunConfig, out_dir: str | None = None) -> RunResult:
    """Run a case and write all diagnostics to out_dir (cfg.out_dir default)."""
    result = simulate(cfg)
    write_outputs(result, out_dir or cfg.out_dir)
    return result


# --------------------------------------------------------------------------
# check suites (pass/fail verdicts behind the CLI and acceptance tests)
# --------------------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    passed: bool
    details: dict

    def __str__(self):
        verdict = "PASS" if self.passed else "FAIL"
        det = ", ".join(f"{k}={v:.3e}" if isinstance(v, float) else f"{k}={v}"
                        for k, v in self.details.items())
        return f"[{verdict}] {self.name}: {det}"


def check_conservation(cfg: RunConfig, drift_tol: float = 1e-8,
                       amp_tol: float = 1e-4, mass_tol: float = 1e-12) -> CheckResult:
    """Energy drift/amplitude and mass bounds over the configured run."""
    res = simulate(cfg)
    cons = res.conservation
    drift = abs(cons.energy_drift_rate())
    amp = cons.energy_amplitude()
    massamp = cons.mass_amplitude()
    ok = drift <= drift_tol and amp <= amp_tol and massamp <= mass_tol
    return CheckResult("conservation", ok, {
        "energy_drift_per_s": drift, "energy_amplitude": amp,
        "mass_amplitude": massamp})


def check_dispersion(cfg: RunConfig, fraction_threshold: float = 0.95,
                     frequency_margin: float = 0.05,
                     center_band: tuple | None = None) -> CheckResult:
    """Spectral power below (1+margin) N at every probe; optional check that
    the center probe's dominant angular frequency falls in center_band*N.

    The power-fraction bound uses Hann-tapered spectra (the rectangular
    window leaks ~10% of a strong near-N line into sidelobes well above N);
    the dominant frequency comes from the plain spectrum.
    """
    res = simulate(cfg)
    params = dg.dispersion_params(res.model)
    tapered = [dg.dft(res.probes.series(p), res.probes.dt, taper=True)
               for p in range(res.probes.n_probes)]
    ok, worst = dg.dispersion_bound_check(tapered, params, fraction_threshold,
                                          frequency_margin)
    details = {"worst_power_fraction": worst, "n_freq": params.n_freq,
               "sigma": params.sigma}
    if center_band is not None:
        pos = res.probes.positions
        center = int(np.argmin((pos[:, 0] - 0.5 * cfg.lx) ** 2
                               + (pos[:, 1] - 0.5 * cfg.lz) ** 2))
        plain = dg.dft(res.probes.series(center), res.probes.dt)
        wdom = plain.dominant_angular_frequency()
        details["center_dominant_omega"] = wdom
        lo, hi = center_band
        ok = ok and lo * params.n_freq <= wdom <= hi * params.n_freq
    return CheckResult("dispersion", ok, details)


def check_equivalence(cfg: RunConfig, tol: float = 1e-12) -> CheckResult:
    """Boussinesq vs anelastic with unit weights, Theta = -B, Pi = Z.

    The two schemes must produce the same trajectory to tol in max-norm.
    """
    if cfg.case != "hydro_boussinesq":
        raise ConfigError("equivalence check starts from a hydro_boussinesq config")
    res_b = simulate(cfg, keep_states=True)
    mesh, dual = res_b.model.mesh, res_b.model.dual

    model_a = make_anelastic(mesh, const(1.0), const(1.0), cp=1.0, g=1.0,
                             pibar=Profile("lin", (0.0, 1.0)), dual=dual)
    state = State(V=res_b.states[0].V.copy(), theta=-res_b.states[0].theta)
    scfg = StepperConfig(dt=cfg.dt, fp_tol=cfg.fp_tol, fp_max_iter=cfg.fp_max_iter,
                         poisson_tol=cfg.poisson_tol, poisson_max_iter=cfg.poisson_max_iter)
    err_v = err_t = 0.0
    vscale = max(max(np.abs(s.V).max() for s in res_b.states), 1e-300)
    tscale = max(np.abs(res_b.states[0].theta).max(), 1e-300)
    for n in range(1, len(res_b.states)):
        state, _ = step(state, model_a, scfg)
        err_v = max(err_v, float(np.abs(state.V - res_b.states[n].V).max()))
        err_t = max(err_t, float(np.abs(state.theta + res_b.states[n].theta).max()))
    ok = err_v <= tol * vscale and err_t <= tol * tscale
    return CheckResult("equivalence", ok, {
        "max_V_diff_rel": err_v / vscale, "max_theta_diff_rel": err_t / tscale,
        "steps": len(res_b.states) - 1})


def check_symmetry(cfg: RunConfig, tol_frac: float = 1e-8) -> CheckResult:
    """Mirror symmetry of a bubble run about x = lx/2 on the regular mesh."""
    if cfg.perturb_c != 0.0:
        raise ConfigError("symmetry check needs the regular mesh")
    res = simulate(cfg)
    err = dg.symmetry_error(res.final.theta, res.model.mesh, 0.5 * cfg.lx)
    tol = tol_frac * cfg.delta_theta
    return CheckResult("symmetry", err <= tol,
                       {"symmetry_error": err, "tolerance": tol})


CHECK_SUITES = {
    "conservation": check_conservation,
    "dispersion": check_dispersion,
    "equivalence": check_equivalence,
    "symmetry": check_symmetry,
}
