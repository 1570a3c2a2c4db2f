"""Command-line front end.

Subcommands ``measure``, ``fig1``, ``survival``, ``asymptotics`` and
``scattering-demo`` each emit a set of named tables (CSV with ``# table:``
headers, or JSON) ending in a ``checks`` table. Exit status is 0 on
success, 2 for configuration or input errors and 3 when a numerical check
fails.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from contextlib import nullcontext

import numpy as np
from scipy import integrate

from .config import ConfigError, RunConfig
from .core import (DegenerateRotation, SpectralObservable, check_density, measurement_probabilities,
                   post_measurement_state)
from .errors import FirstKindError
from .position import (EPS0_WARN, X_EXTENT, GaussianPacket, SampledDistribution, closed_form_product,
                       dimensionless_W, packet_momentum_density, packet_position_density_ideal,
                       renormalize_positive, sample_grid, survival_position_exact,
                       survival_position_first_order, survival_position_gaussian, uncertainty_product)
from .report import Table, load_json, parse_complex, write_csv, write_json
from .rhs_grid import CellGrid, cell_amplitudes
from .scattering import (BandFamily, ScatteringModel, double_limit_probe, is_bound_state_free,
                         completeness_defect, normalization_from_t_matrix, transition_amplitudes,
                         unitarity_defects)
from .survival import SurvivalDistribution, nonideal_probability, q_factor
from .tails import (normalization_asymptotic, normalization_exact, normalization_excess,
                    normalization_excess_asymptotic, renormalized_moment, tail_moment_asymptotic,
                    tail_moment_exact)

EXIT_OK, EXIT_CONFIG, EXIT_CHECK = 0, 2, 3
SQRT_PI = math.sqrt(math.pi)


def _checks() -> Table:
    return Table("checks", ["check", "value", "target", "tolerance", "pass"])


def _check(table: Table, name: str, value: float, target: float, tol: float) -> None:
    table.add(name, float(value), float(target), float(tol), bool(abs(value - target) <= tol))


def _distribution(cfg: RunConfig) -> SurvivalDistribution:
    sv = cfg.survival
    return SurvivalDistribution(sv.kind, sv.tau, sv.s, math.inf if sv.tau0 is None else sv.tau0)


def _packet(cfg: RunConfig) -> GaussianPacket:
    return GaussianPacket(cfg.packet.a, cfg.packet.p0, cfg.constants.hbar, cfg.constants.m)


# measure ---------------------------------------------------------------

MEASURE_KEYS = {"observable", "eigenvalues", "blocks", "rho", "psi", "hamiltonian"}


def _read_observable(path: str):
    data = load_json(path)
    extra = set(data) - MEASURE_KEYS
    if extra:
        raise ConfigError(f"{path}: unknown keys {sorted(extra)}")
    try:
        if "observable" in data:
            obs = SpectralObservable.from_matrix(parse_complex(data["observable"], "observable"))
        elif "eigenvalues" in data and "blocks" in data:
            blocks = tuple(parse_complex(b, "blocks", square=False) for b in data["blocks"])
            obs = SpectralObservable(np.asarray(data["eigenvalues"], dtype=float), blocks)
        else:
            raise ConfigError(f"{path}: need 'observable' or 'eigenvalues' + 'blocks'")
        if "rho" in data:
            rho = check_density(parse_complex(data["rho"], "rho"))
        elif "psi" in data:
            psi = parse_complex(data["psi"], "psi", ndim=1)
            if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
                raise ConfigError(f"{path}: psi must have unit norm")
            rho = np.outer(psi, psi.conj())
        else:
            raise ConfigError(f"{path}: need a state, 'rho' or 'psi'")
        h = parse_complex(data["hamiltonian"], "hamiltonian") if "hamiltonian" in data else np.zeros_like(rho)
    except ConfigError:
        raise
    except FirstKindError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if rho.shape != (obs.dim, obs.dim) or h.shape != rho.shape:
        raise ConfigError(f"{path}: observable, state and Hamiltonian dimensions differ")
    return obs, rho, h


def cmd_measure(args, cfg: RunConfig) -> list[Table]:
    obs, rho, h = _read_observable(args.observable)
    hbar = cfg.constants.hbar
    dist = _distribution(cfg)
    p_ideal = measurement_probabilities(rho, obs)
    try:
        p_non = nonideal_probability(rho, h, dist, obs, hbar)
    except FirstKindError as exc:
        raise ConfigError(f"hamiltonian: {exc}") from exc
    probs = Table("probabilities", ["alpha", "eigenvalue", "degeneracy", "P_ideal", "P_nonideal"])
    for a, (lam, g) in enumerate(zip(obs.eigenvalues, obs.degeneracies)):
        probs.add(a, float(lam), g, float(p_ideal[a]), float(p_non[a]))
    states = Table("post_states", ["alpha", "row", "col", "re", "im"])
    checks = _checks()
    rot = DegenerateRotation.identity(obs)
    for a in range(len(obs)):
        if p_ideal[a] <= args.zero_tol:
            continue
        _, rho_a = post_measurement_state(rho, obs, rot, a)
        for i in range(obs.dim):
            for j in range(obs.dim):
                states.add(a, i, j, float(rho_a[i, j].real), float(rho_a[i, j].imag))
        again = measurement_probabilities(0.5 * (rho_a + rho_a.conj().T), obs)
        _check(checks, f"repeat_P[{a}]", float(again[a]), 1.0, 1e-12)
    _check(checks, "sum_P_ideal", float(np.sum(p_ideal)), 1.0, 1e-12)
    _check(checks, "sum_P_nonideal", float(np.sum(p_non)), 1.0, 1e-12)
    return [probs, states, checks]


# fig1 ------------------------------------------------------------------

def xi_grid(xi_min: float, xi_max: float, step: float) -> np.ndarray:
    n = int(round((xi_max - xi_min) / step)) + 1
    xi = np.round(xi_min + step * np.arange(n), 12)
    return xi + 0.0  # drops negative zero


def cmd_fig1(args, cfg: RunConfig) -> list[Table]:
    if any(e < 0 for e in args.eps0):
        raise ConfigError("eps0 values must be non-negative")
    if not args.xi_step > 0 or args.xi_max < args.xi_min:
        raise ConfigError("need xi-step > 0 and xi-max >= xi-min")
    xi = xi_grid(args.xi_min, args.xi_max, args.xi_step)
    cols = [dimensionless_W(e, xi) for e in args.eps0]
    table = Table("fig1", ["xi"] + [f"W_eps0={e:g}" for e in args.eps0])
    for k, x in enumerate(xi):
        table.add(float(x), *(float(c[k]) for c in cols))
    checks = _checks()
    for e, c in zip(args.eps0, cols):
        _check(checks, f"W(0)_eps0={e:g}", float(dimensionless_W(e, 0.0)), 1.0 / SQRT_PI, 1e-15)
        if xi.size > 4:
            # tails beyond the window are below erfc(|xi|) for these shapes; the
            # step-doubling difference bounds the Simpson discretization error
            mass = integrate.simpson(c, x=xi)
            coarse = integrate.simpson(c[::2], x=xi[::2])
            tail = math.erfc(min(-xi[0], xi[-1])) * (1 + math.sqrt(2 * e) * max(abs(xi[0]), abs(xi[-1])))
            _check(checks, f"mass_eps0={e:g}", mass, 1.0, tail + abs(mass - coarse) + 1e-6)
    return [table, checks]


# survival --------------------------------------------------------------

def _momentum_grid(pk: GaussianPacket, cfg: RunConfig) -> CellGrid:
    eps = cfg.grid.eps * pk.b
    if cfg.grid.N is not None:
        n0 = math.floor(pk.p0 / eps + 0.5)
        return CellGrid("momentum", eps, 1, n0 - cfg.grid.N, n0 + cfg.grid.N)
    return CellGrid.covering("momentum", eps, pk.p0, cfg.grid.coverage * pk.b)


def _exact_gap(pk, dist, grid, x, p_first_ref=None):
    exact = survival_position_exact(pk, dist, grid, x)
    first = survival_position_gaussian(pk, dist, x) if p_first_ref is None else p_first_ref
    return exact, float(np.max(np.abs(exact - first)))


def cmd_survival(args, cfg: RunConfig) -> list[Table]:
    pk = _packet(cfg)
    dist = _distribution(cfg)
    l = pk.drift(dist)
    eps0 = pk.eps0(dist)
    if eps0 > EPS0_WARN:
        print(f"warning: eps0 = {eps0:.6g} exceeds {EPS0_WARN}; first-order results are outside "
              f"their small-drift regime", file=sys.stderr)
    # the exact density spreads with the drift; widen the window so its mass stays inside
    x = sample_grid(pk, None, args.samples, X_EXTENT + 40.0 * abs(l) / pk.a)
    p_ideal = packet_position_density_ideal(pk, x)
    p_first = survival_position_first_order(pk.psi, dist, pk.m, pk.hbar, x, pk.psi_xx)
    p_gauss = survival_position_gaussian(pk, dist, x)
    raw = SampledDistribution(x, p_gauss)
    renorm, q = renormalize_positive(raw, pk.root(dist) if l != 0 else None)
    grid = _momentum_grid(pk, cfg)
    p_exact, gap = _exact_gap(pk, dist, grid, x, p_first)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        dx_raw, dp, prod_raw = uncertainty_product(pk, dist, use_renormalized=False)
        dx_ren, _, prod_ren = uncertainty_product(pk, dist, use_renormalized=True)
    closed = closed_form_product(pk, dist)

    summary = Table("summary", ["quantity", "value"])
    rows = [("eps0", eps0), ("l", l), ("x0", pk.root(dist)), ("Q", q),
            ("mean_x_raw", raw.mean()), ("mean_x_renormalized", renorm.mean()),
            ("dx_raw", dx_raw), ("dx_renormalized", dx_ren), ("dp", dp),
            ("dxdp_raw", prod_raw), ("dxdp_renormalized", prod_ren), ("dxdp_closed_form", closed),
            ("dxdp_rel_err", prod_ren / closed - 1.0), ("hbar_over_2", 0.5 * pk.hbar),
            ("gap_exact_first_order", gap)]
    if dist.tau > 0:
        half = SurvivalDistribution(dist.kind, dist.tau / 2, dist.s, dist.tau0)
        _, gap_half = _exact_gap(pk, half, grid, x)
        rows += [("gap_exact_first_order_half_tau", gap_half),
                 ("gap_ratio", gap / gap_half if gap_half > 0 else math.nan)]
    for name, v in rows:
        summary.add(name, float(v))

    position = Table("position", ["x", "P_ideal", "P_first_order", "P_renormalized", "P_exact"])
    for k in range(x.size):
        position.add(float(x[k]), float(p_ideal[k]), float(p_first[k]), float(renorm.density[k]),
                     float(p_exact[k]))

    # momentum: diagonal of the survival-averaged cell density matrix, q(0) = 1
    amps = cell_amplitudes(pk.momentum_amplitude, grid).values
    centers = grid.centers()
    diag = np.abs(amps) ** 2 * np.real(q_factor(dist, np.zeros(centers.size)))
    momentum = Table("momentum", ["p", "P_closed_form", "P_cells"])
    closed_p = packet_momentum_density(pk, centers)
    for k in range(centers.size):
        momentum.add(float(centers[k]), float(closed_p[k]), float(diag[k] / grid.eps))

    checks = _checks()
    _check(checks, "integral_P_first_order", SampledDistribution(x, p_first).integral(), 1.0, 1e-10)
    _check(checks, "integral_P_renormalized", renorm.integral(), 1.0, 1e-8)
    _check(checks, "integral_P_exact", SampledDistribution(x, p_exact).integral(), 1.0, 1e-6)
    _check(checks, "momentum_cells_captured", float(np.sum(np.abs(amps) ** 2)), 1.0, 1e-3)
    return [summary, position, momentum, checks]


# asymptotics -----------------------------------------------------------

def _tail_quadrature(n: int, a: float, l: float) -> float:
    x0 = -a * a / (2 * l)
    f = lambda x: x ** n * (1 + 2 * l * x / a ** 2) * math.exp(-x * x / a ** 2) / (SQRT_PI * a)
    val, _ = integrate.quad(f, -math.inf, x0, epsabs=1e-300, epsrel=1e-13, limit=200)
    return val


def cmd_asymptotics(args, cfg: RunConfig) -> list[Table]:
    if any(not s > 1 for s in args.sigma):
        raise ConfigError("sigma values must exceed 1")
    a = cfg.packet.a
    moments = Table("tail_moments", ["sigma", "n", "exact", "asymptotic", "quadrature",
                                     "rel_err_asymptotic", "abs_err_quadrature"])
    norm = Table("normalization", ["sigma", "Q_exact", "Q_asymptotic", "Q_minus_1_exact",
                                     "Q_minus_1_asymptotic", "rel_err_Q_minus_1"])
    renorm = Table("renormalized", ["sigma", "l", "mean_x", "mean_x_minus_l", "second_x", "second_x_minus_half_a2"])
    checks = _checks()
    for s in args.sigma:
        l = a / (2 * math.sqrt(s))
        for n in (0, 1, 2):
            ex, asy, qd = tail_moment_exact(n, a, l), tail_moment_asymptotic(n, a, l), _tail_quadrature(n, a, l)
            moments.add(float(s), n, ex, asy, qd, asy / ex - 1.0, ex - qd)
            _check(checks, f"quadrature_sigma={s:g}_n={n}", ex - qd, 0.0, 1e-11)
        ee, ea = normalization_excess(a, l), normalization_excess_asymptotic(a, l)
        norm.add(float(s), normalization_exact(a, l), normalization_asymptotic(a, l), ee, ea, ea / ee - 1.0)
        m1, m2 = renormalized_moment(1, a, l), renormalized_moment(2, a, l)
        renorm.add(float(s), l, m1, m1 - l, m2, m2 - a * a / 2)
    return [moments, norm, renorm, checks]


# scattering-demo -------------------------------------------------------

MODEL_KEYS = {"H0", "HI", "hbar"}


def _read_model(path: str):
    data = load_json(path)
    extra = set(data) - MODEL_KEYS
    if extra:
        raise ConfigError(f"{path}: unknown keys {sorted(extra)}")
    if "H0" not in data or "HI" not in data:
        raise ConfigError(f"{path}: need 'H0' and 'HI'")
    h0 = parse_complex(data["H0"], "H0")
    hi = parse_complex(data["HI"], "HI")
    hbar = float(data.get("hbar", 1.0))
    try:
        ScatteringModel(h0, hi, 1.0, hbar)
    except FirstKindError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return h0, hi, hbar


def cmd_scattering_demo(args, cfg: RunConfig) -> list[Table]:
    h0, hi, hbar = _read_model(args.model)
    spread = float(np.ptp(np.linalg.eigvalsh(h0 + hi))) or 1.0
    nus = args.nu if args.nu else [f * spread / hbar for f in (1e-2, 1e-3, 1e-4)]
    if any(not v > 0 for v in nus):
        raise ConfigError("nu values must be positive")
    defects = Table("defects", ["nu", "isometry_plus", "isometry_minus", "s_dagger_s", "s_s_dagger",
                                "completeness", "bound_state_free"])
    norms = Table("normalization", ["nu", "lam", "N_norm", "N_t_matrix", "time_spread"])
    checks = _checks()
    for nu in nus:
        model = ScatteringModel(h0, hi, nu, hbar)
        d = unitarity_defects(model)
        defects.add(float(nu), d["isometry_plus"], d["isometry_minus"], d["s_dagger_s"], d["s_s_dagger"],
                    completeness_defect(model), is_bound_state_free(model))
        for lam in range(model.dim):
            sums = []
            n_norm = None
            for t in args.times:
                f, n_norm = transition_amplitudes(model, lam, t)
                sums.append(float(np.sum(np.abs(f) ** 2)))
            n_t = normalization_from_t_matrix(model, lam)
            spread_t = max(sums) - min(sums)
            norms.add(float(nu), lam, n_norm, n_t, spread_t)
            _check(checks, f"time_spread_nu={nu:.3g}_lam={lam}", spread_t, 0.0, 1e-10)
            _check(checks, f"N_two_ways_nu={nu:.3g}_lam={lam}", n_norm - n_t, 0.0, 1e-8)
    tables = [defects, norms]
    if args.probe:
        probe = Table("double_limit_probe", ["eps", "nu", "eps3_over_nu", "N", "deviation"])
        family = BandFamily()
        rows = double_limit_probe(family, args.probe_eps, args.probe_nu)
        rows += double_limit_probe(family, [0.0], args.probe_nu)
        for e in args.path_eps:
            rows += double_limit_probe(family, [e], [e ** 3])
        for r in rows:
            probe.add(r["eps"], r["nu"], r["eps3_over_nu"], r["N"], r["deviation"])
        tables.append(probe)
    return tables + [checks]


# driver ----------------------------------------------------------------

COMMANDS = {
    "measure": cmd_measure,
    "fig1": cmd_fig1,
    "survival": cmd_survival,
    "asymptotics": cmd_asymptotics,
    "scattering-demo": cmd_scattering_demo,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="firstkind", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration JSON")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=["csv", "json"], help="output format (default from config: csv)")
    common.add_argument("--precision", type=int, help="significant digits (default from config: 15)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", parents=[common], help="ideal and non-ideal outcome probabilities")
    p.add_argument("observable", help="JSON file with the observable, state and optional Hamiltonian")
    p.add_argument("--zero-tol", type=float, default=1e-12, help="skip post-states of outcomes below this probability")

    p = sub.add_parser("fig1", parents=[common], help="dimensionless first-order position density W(xi)")
    p.add_argument("--eps0", type=float, nargs="+", default=[0.0, 0.1, 0.2])
    p.add_argument("--xi-min", type=float, default=-3.0)
    p.add_argument("--xi-max", type=float, default=3.0)
    p.add_argument("--xi-step", type=float, default=0.01)

    p = sub.add_parser("survival", parents=[common], help="survival effect on the Gaussian packet")
    p.add_argument("--samples", type=int, default=4096, help="position samples on [-8a, 8a]")

    p = sub.add_parser("asymptotics", parents=[common], help="negative-tail moments and normalization")
    p.add_argument("--sigma", type=float, nargs="+", default=[9.0, 16.0, 25.0, 36.0, 64.0])

    p = sub.add_parser("scattering-demo", parents=[common], help="wave operators, S-matrix and normalization")
    p.add_argument("--model", required=True, help="JSON file with H0, HI and optional hbar")
    p.add_argument("--nu", type=float, nargs="+", help="damping values (default: 1e-2, 1e-3, 1e-4 x spread)")
    p.add_argument("--times", type=float, nargs="+", default=[0.0, 1.0, 7.0])
    p.add_argument("--probe", action=argparse.BooleanOptionalAction, default=True,
                   help="append the band-model double-limit table")
    p.add_argument("--probe-eps", type=float, nargs="+", default=[0.1, 0.05, 0.025])
    p.add_argument("--probe-nu", type=float, nargs="+", default=[1e-3])
    p.add_argument("--path-eps", type=float, nargs="+", default=[0.5, 0.4, 0.3],
                   help="cell sizes on the nu = eps**3 path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config) if args.config else RunConfig().validate()
        cfg = cfg.replace_output(format=args.format, path=args.out, precision=args.precision)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        tables = COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FirstKindError as exc:
        print(f"invariant violation: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CHECK
    out = cfg.output
    with (open(out.path, "w", newline="") if out.path else nullcontext(sys.stdout)) as fh:
        if out.format == "json":
            write_json(args.command, tables, fh, out.precision)
        else:
            write_csv(tables, fh, out.precision)
    failed = [r[0] for t in tables if t.name == "checks" for r in t.rows if not r[-1]]
    if failed:
        print(f"failed checks: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK
