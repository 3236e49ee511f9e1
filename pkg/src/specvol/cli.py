"""Scenario runner and command-line entry point.

Builtin scenarios cover the classic experiment set (advected rectangle,
Burgers sine and rarefaction step, Sod and Lax shock tubes, the smooth Euler
density bump for convergence studies); each can also be described in an INI
config file. Outputs are plot-ready CSV files written with 17 significant
digits so they parse back to the exact in-memory values.
"""

import argparse
import configparser
import io
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import InadmissibleStateError, StepFailureError
from .mesh import build_grid
from .reference import (
    error_norms,
    exact_advection,
    exact_euler_density_bump,
    lax_friedrichs_solver,
    observed_order,
)
from .riemann import FixedBC, PeriodicBC
from .systems import advection_system, burgers_system, euler_system, primitive_to_conserved
from .timeint import SolverConfig, init_field, integrate

__all__ = ["Scenario", "BUILTIN_SCENARIOS", "list_scenarios", "load_scenario",
           "run_scenario", "run_convergence", "main"]

OUT_DIR_ENV = "SPECVOL_OUT_DIR"

_FMT = "%.17g"


@dataclass(frozen=True)
class Scenario:
    name: str
    system: str  # advection | burgers | euler
    initial: str  # key into the initial-condition registry
    a: float
    b: float
    n_sv: int
    n_cv: int
    bc: str  # periodic | fixed
    t_end: float
    cfl: float = 0.1
    stabilization: bool = True
    velocity: float = 1.0  # advection only
    gamma: float = 1.4  # euler only
    quad_order: int = 8
    diagnostics_every: int = 10

    def build_system(self):
        if self.system == "advection":
            return advection_system(self.velocity)
        if self.system == "burgers":
            return burgers_system()
        if self.system == "euler":
            return euler_system(self.gamma)
        raise ValueError(f"unknown system {self.system!r}")

    def initial_condition(self):
        """(u0 callable, jump locations) for this scenario."""
        gamma = self.gamma
        table = {
            "rectangle": (lambda x: 1.0 if 0.25 <= x <= 0.75 else 0.0, (0.25, 0.75)),
            "sine": (lambda x: np.sin(np.pi * x), ()),
            "step": (lambda x: -1.0 if x <= 1.0 else 1.0, (1.0,)),
            "sod": (
                lambda x: primitive_to_conserved(1.0, 0.0, 1.0, gamma)
                if x < 5.0
                else primitive_to_conserved(0.125, 0.0, 0.1, gamma),
                (5.0,),
            ),
            "lax": (
                lambda x: primitive_to_conserved(0.445, 0.698, 3.528, gamma)
                if x < 5.0
                else primitive_to_conserved(0.5, 0.0, 0.571, gamma),
                (5.0,),
            ),
            "density-bump": (
                lambda x: primitive_to_conserved(*exact_euler_density_bump(0.0, x, gamma), gamma),
                (),
            ),
        }
        if self.initial not in table:
            raise ValueError(f"unknown initial condition {self.initial!r}")
        return table[self.initial]

    def to_config_text(self) -> str:
        cp = configparser.ConfigParser()
        cp["scenario"] = {
            "name": self.name,
            "system": self.system,
            "initial": self.initial,
            "a": _FMT % self.a,
            "b": _FMT % self.b,
            "n_sv": str(self.n_sv),
            "n_cv": str(self.n_cv),
            "bc": self.bc,
            "t_end": _FMT % self.t_end,
            "cfl": _FMT % self.cfl,
            "stabilization": str(self.stabilization).lower(),
            "velocity": _FMT % self.velocity,
            "gamma": _FMT % self.gamma,
            "quad_order": str(self.quad_order),
            "diagnostics_every": str(self.diagnostics_every),
        }
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


BUILTIN_SCENARIOS = {
    s.name: s
    for s in [
        Scenario("advect-rect", "advection", "rectangle", 0.0, 1.0, 60, 4, "periodic", 1.0),
        Scenario("burgers-sine", "burgers", "sine", 0.0, 2.0, 200, 4, "periodic", 0.5),
        Scenario("burgers-rarefaction", "burgers", "step", 0.0, 2.0, 200, 4, "fixed", 0.5),
        Scenario("sod", "euler", "sod", 0.0, 10.0, 200, 4, "fixed", 2.0),
        Scenario("lax", "euler", "lax", 0.0, 10.0, 200, 4, "fixed", 2.0),
        Scenario("density-bump", "euler", "density-bump", 0.0, 10.0, 20, 4, "periodic", 10.0),
    ]
}


def list_scenarios():
    return sorted(BUILTIN_SCENARIOS)


def load_scenario(path: str) -> Scenario:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise FileNotFoundError(f"cannot read config {path!r}")
    sec = cp["scenario"]
    return Scenario(
        name=sec.get("name", os.path.splitext(os.path.basename(path))[0]),
        system=sec["system"],
        initial=sec["initial"],
        a=sec.getfloat("a"),
        b=sec.getfloat("b"),
        n_sv=sec.getint("n_sv"),
        n_cv=sec.getint("n_cv"),
        bc=sec.get("bc", "periodic"),
        t_end=sec.getfloat("t_end"),
        cfl=sec.getfloat("cfl", 0.1),
        stabilization=sec.getboolean("stabilization", True),
        velocity=sec.getfloat("velocity", 1.0),
        gamma=sec.getfloat("gamma", 1.4),
        quad_order=sec.getint("quad_order", 8),
        diagnostics_every=sec.getint("diagnostics_every", 10),
    )


def _component_names(system):
    return ["rho", "momentum", "energy"] if system.m == 3 else ["u"]


def _boundary_condition(scenario: Scenario, u0):
    if scenario.bc == "periodic":
        return PeriodicBC()
    if scenario.bc == "fixed":
        left = np.reshape(np.asarray(u0(scenario.a), dtype=float), (-1,))
        right = np.reshape(np.asarray(u0(scenario.b), dtype=float), (-1,))
        return FixedBC(left=left, right=right)
    raise ValueError(f"unknown boundary condition {scenario.bc!r}")


def _write_csv(path, header_comment, columns, rows):
    with open(path, "w") as fh:
        fh.write(f"# {header_comment}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_FMT % v if isinstance(v, float) else str(v) for v in row))
            fh.write("\n")
    return path


def _write_solution_csv(path, scenario, state):
    names = _component_names(state.system)
    centers = state.grid.cv_centers().ravel()
    widths = np.tile(state.grid.cv_widths, state.grid.num_sv)
    flat = state.data.reshape(-1, state.system.m)
    rows = [
        [float(x), float(w), *map(float, u)] for x, w, u in zip(centers, widths, flat)
    ]
    comment = (
        f"system={scenario.system} scenario={scenario.name} t={_FMT % state.time} "
        f"n_sv={scenario.n_sv} n_cv={scenario.n_cv} "
        f"stabilization={'on' if scenario.stabilization else 'off'}"
    )
    return _write_csv(path, comment, ["x_center", "width", *names], rows)


def read_solution_csv(path):
    """Parse a solution CSV back into (x_centers, widths, values)."""
    data = np.loadtxt(path, delimiter=",", skiprows=2)
    data = np.atleast_2d(data)
    return data[:, 0], data[:, 1], data[:, 2:]


def run_scenario(scenario: Scenario, out_dir: str, ref_cells: int = 0):
    """Run one scenario and write its output files; returns {kind: path}.

    A step failure keeps whatever was computed: the last admissible field and
    the diagnostics collected so far are written, and the error is recorded
    in the returned mapping under ``"error"``.
    """
    os.makedirs(out_dir, exist_ok=True)
    system = scenario.build_system()
    grid = build_grid(scenario.a, scenario.b, scenario.n_sv, scenario.n_cv)
    u0, breakpoints = scenario.initial_condition()
    state = init_field(u0, grid, system, scenario.quad_order, breakpoints)
    bc = _boundary_condition(scenario, u0)
    config = SolverConfig(
        t_end=scenario.t_end,
        cfl=scenario.cfl,
        bc=bc,
        stabilization_enabled=scenario.stabilization,
        diagnostics_every=scenario.diagnostics_every,
    )

    outputs = {}
    error = None
    try:
        final, diag = integrate(state, config)
    except (StepFailureError, InadmissibleStateError) as exc:
        final, diag = getattr(exc, "last_state", state), getattr(exc, "diagnostics", None)
        error = exc

    base = os.path.join(out_dir, scenario.name)
    outputs["solution"] = _write_solution_csv(f"{base}_solution.csv", scenario, final)
    if diag is not None and diag.l2_times:
        outputs["l2"] = _write_csv(
            f"{base}_l2.csv",
            f"scenario={scenario.name} discrete L2 norm over time",
            ["t", "l2"],
            [[float(t), float(v)] for t, v in zip(diag.l2_times, diag.l2_values)],
        )
    if diag is not None and diag.last_report is not None:
        rep = diag.last_report
        rows = [
            [
                i,
                float(rep.lambda_ed[i]),
                float(rep.lambda_er_l[i]),
                float(rep.lambda_er_r[i]),
                float(rep.lambda_sum[i]),
                float(rep.lambda_final[i]),
                int(rep.clamped[i]),
                int(diag.clamp_totals[i]),
            ]
            for i in range(rep.num_sv)
        ]
        outputs["diagnostics"] = _write_csv(
            f"{base}_lambda.csv",
            f"scenario={scenario.name} correction sizes of the last stage; "
            f"den_fallbacks={rep.den_fallbacks} sigma_fallbacks={rep.sigma_fallbacks}",
            ["sv", "lambda_ed", "lambda_er_l", "lambda_er_r", "lambda_sum",
             "lambda_final", "clamped", "clamp_total"],
            rows,
        )
    if ref_cells and error is None:
        ref = lax_friedrichs_solver(
            system, u0, scenario.a, scenario.b, ref_cells, 0.9, scenario.t_end, bc
        )
        rows = [
            [float(x), float((scenario.b - scenario.a) / ref_cells), *map(float, u)]
            for x, u in zip(ref.positions, ref.values)
        ]
        outputs["reference"] = _write_csv(
            f"{base}_reference.csv",
            f"system={scenario.system} scenario={scenario.name} reference "
            f"t={_FMT % scenario.t_end} cells={ref_cells} provenance={ref.provenance}",
            ["x_center", "width", *_component_names(system)],
            rows,
        )
    if error is not None:
        if isinstance(error, StepFailureError):
            where = f"sv={error.sv} cv={error.cv} t={error.time:.6g}"
            kind = "step-failure"
        else:
            where = f"index={getattr(error, 'where', None)} t={_FMT % final.time}"
            kind = "state-error"
        outputs["error"] = f"error kind={kind} scenario={scenario.name} {where}"
    return outputs


def _periodic_exact(scenario: Scenario, t: float):
    """Exact state function (conserved) at time t for smooth periodic cases."""
    length = scenario.b - scenario.a
    if scenario.system == "euler" and scenario.initial == "density-bump":
        gamma = scenario.gamma

        def exact(xs):
            xs = np.asarray(xs, dtype=float)
            # wrap the advected coordinate so integer periods line back up
            d = np.mod(xs - t - 5.0 + 0.5 * length, length) - 0.5 * length
            rho = 1.0 + np.exp(-0.5 * d**2)
            return primitive_to_conserved(rho, np.ones_like(rho), np.ones_like(rho), gamma)

        return exact
    if scenario.system == "advection" and scenario.bc == "periodic":
        u0, _ = scenario.initial_condition()
        v = scenario.velocity

        def exact(xs):
            vals = exact_advection(u0, v, t, np.asarray(xs, dtype=float), scenario.a, scenario.b)
            return np.reshape(vals, (-1, 1))

        return exact
    raise ValueError(f"no exact solution registered for scenario {scenario.name!r}")


def run_convergence(base: Scenario, n_sv_list, out_dir: str):
    """One run per resolution against the exact solution; returns table rows.

    Rows are (n_sv, L1, L2); the written CSV adds per-pair experimental
    orders for both norms (empty for the first resolution).
    """
    os.makedirs(out_dir, exist_ok=True)
    exact = _periodic_exact(base, base.t_end)
    results = []
    for n_sv in n_sv_list:
        scen = replace(base, n_sv=int(n_sv))
        system = scen.build_system()
        grid = build_grid(scen.a, scen.b, scen.n_sv, scen.n_cv)
        u0, breakpoints = scen.initial_condition()
        state = init_field(u0, grid, system, scen.quad_order, breakpoints)
        config = SolverConfig(
            t_end=scen.t_end,
            cfl=scen.cfl,
            bc=_boundary_condition(scen, u0),
            stabilization_enabled=scen.stabilization,
        )
        final, _ = integrate(state, config)
        results.append(
            (int(n_sv), error_norms(final, exact, "L1"), error_norms(final, exact, "L2"))
        )
    ns = [r[0] for r in results]
    rows = []
    for idx, (n_sv, l1, l2) in enumerate(results):
        if idx == 0:
            rows.append([n_sv, l1, l2, "", ""])
        else:
            eoc1 = observed_order([results[idx - 1][1], l1], [ns[idx - 1], n_sv])[0]
            eoc2 = observed_order([results[idx - 1][2], l2], [ns[idx - 1], n_sv])[0]
            rows.append([n_sv, l1, l2, float(eoc1), float(eoc2)])
    path = os.path.join(out_dir, f"{base.name}_convergence.csv")
    _write_csv(
        path,
        f"scenario={base.name} t={_FMT % base.t_end} n_cv={base.n_cv}",
        ["n_sv", "l1", "l2", "eoc_l1", "eoc_l2"],
        rows,
    )
    return results, path


def _resolve_scenario(token: str) -> Scenario:
    if os.path.exists(token):
        return load_scenario(token)
    if token in BUILTIN_SCENARIOS:
        return BUILTIN_SCENARIOS[token]
    raise SystemExit(
        f"error kind=unknown-scenario name={token!r}; "
        f"builtins: {', '.join(list_scenarios())}"
    )


def _apply_overrides(scenario: Scenario, args) -> Scenario:
    updates = {}
    if args.no_stabilization:
        updates["stabilization"] = False
    if args.cfl is not None:
        updates["cfl"] = args.cfl
    if args.nsv is not None:
        updates["n_sv"] = args.nsv
    if args.ncv is not None:
        updates["n_cv"] = args.ncv
    if args.t_end is not None:
        updates["t_end"] = args.t_end
    return replace(scenario, **updates) if updates else scenario


def _out_dir(args) -> str:
    return args.out_dir or os.environ.get(OUT_DIR_ENV) or "out"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="specvol",
        description="Spectral-volume solver for 1-D conservation laws with "
        "entropy-rate stabilization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario (builtin name or config path)")
    run_p.add_argument("scenario")
    conv_p = sub.add_parser("convergence", help="refinement study for a smooth scenario")
    conv_p.add_argument("scenario")
    conv_p.add_argument(
        "--nsv-list",
        default="10,12,14,16,18,20,22",
        help="comma-separated spectral-volume counts",
    )
    sub.add_parser("list", help="list builtin scenarios")

    for p in (run_p, conv_p):
        p.add_argument("--no-stabilization", action="store_true")
        p.add_argument("--cfl", type=float, default=None)
        p.add_argument("--nsv", type=int, default=None)
        p.add_argument("--ncv", type=int, default=None)
        p.add_argument("--t-end", type=float, default=None)
        p.add_argument("--out-dir", default=None)
        p.add_argument("--ref-cells", type=int, default=0)

    args = parser.parse_args(argv)
    if args.command == "list":
        for name in list_scenarios():
            print(name)
        return 0

    scenario = _apply_overrides(_resolve_scenario(args.scenario), args)
    if args.command == "run":
        outputs = run_scenario(scenario, _out_dir(args), ref_cells=args.ref_cells)
        for kind, path in outputs.items():
            if kind != "error":
                print(f"{kind}: {path}")
        if "error" in outputs:
            print(outputs["error"], file=sys.stderr)
            return 1
        return 0

    n_sv_list = [int(tok) for tok in args.nsv_list.split(",") if tok]
    results, path = run_convergence(scenario, n_sv_list, _out_dir(args))
    print(f"convergence: {path}")
    for n_sv, l1, l2 in results:
        print(f"n_sv={n_sv} L1={l1:.6e} L2={l2:.6e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
