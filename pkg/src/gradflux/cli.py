"""Batch front-end: single solves, convergence sweeps, data-assignment
studies and self-verification, driven by a JSON configuration.

Exit codes: 0 success, 1 configuration/validation error, 2 numerical
failure (solver breakdown or a failing verification check).
"""

import argparse
import json
import os
import sys

import numpy as np

from . import manufactured
from .data_assign import build_dataset, write_dataset_csv
from .forms import (FORMULATION_KINDS, Formulation, ProblemData,
                    StabilizationParams, assemble, dirichlet_values,
                    stability_norm_matrix)
from .mesh import mesh_size, unit_square_mesh
from .postproc import (plot_loglog, write_nodal_error_csv,
                        write_report, nodal_error_field)
from .solver import SolverError
from .study import (convergence_study, problem_data_for, sector_meshes,
                    solve_case, square_meshes)

_CASES = ("case1", "case2", "case3")


class ConfigError(ValueError):
    """Configuration failed validation; message names the field."""


class RunConfig:
    """Validated run configuration.

    JSON shape:
        case:        {"name": "case1"} | {"name": "case2", "phi": <rad>}
                     | {"name": "case3", "nd": <int or null>}
        formulation: "natural" | "eo_unstab" | "eo_min" | "eo_full"
        k:           0 | 1 | 2
        mesh:        {"sizes": [..], "grading": <real>=1>}
        kappa, zeta: positive reals (default 1)
        stabilization: optional coefficient overrides
        nd_list:     data-study sampling resolutions
        quad_exactness, output, seed, fd_step: optional
    """

    def __init__(self, raw):
        if not isinstance(raw, dict):
            raise ConfigError("config: expected a JSON object")
        case = raw.get("case", {"name": "case1"})
        if isinstance(case, str):
            case = {"name": case}
        if case.get("name") not in _CASES:
            raise ConfigError(f"case.name: expected one of {_CASES}, "
                              f"got {case.get('name')!r}")
        self.case_name = case["name"]
        self.phi = float(case.get("phi", np.pi / 2))
        if self.case_name == "case2" and not 0.0 < self.phi < np.pi:
            raise ConfigError(f"case.phi: must lie in (0, pi), "
                              f"got {self.phi}")
        self.nd = case.get("nd")
        if self.nd is not None:
            self.nd = int(self.nd)
            if self.nd < 1:
                raise ConfigError(f"case.nd: must be >= 1, got {self.nd}")

        kind = raw.get("formulation", "natural")
        if kind not in FORMULATION_KINDS:
            raise ConfigError(f"formulation: expected one of "
                              f"{FORMULATION_KINDS}, got {kind!r}")
        self.kind = kind
        self.k = int(raw.get("k", 0))
        if self.k not in (0, 1, 2):
            raise ConfigError(f"k: expected 0, 1 or 2, got {self.k}")
        if self.case_name in ("case2", "case3") and self.k != 0:
            raise ConfigError(f"k: {self.case_name} studies use k = 0 only")

        mesh = raw.get("mesh", {})
        self.sizes = [int(n) for n in mesh.get("sizes", [8, 16, 32])]
        if any(n < 1 for n in self.sizes):
            raise ConfigError("mesh.sizes: entries must be >= 1")
        self.grading = float(mesh.get("grading", 2.0))
        if self.grading < 1.0:
            raise ConfigError(f"mesh.grading: must be >= 1, "
                              f"got {self.grading}")

        self.kappa = float(raw.get("kappa", 1.0))
        if self.kappa <= 0.0:
            raise ConfigError(f"kappa: must be positive, got {self.kappa}")
        self.zeta = float(raw.get("zeta", 1.0))

        stab = raw.get("stabilization")
        if stab is not None:
            try:
                self.stabilization = StabilizationParams(**stab)
            except (TypeError, ValueError) as err:
                raise ConfigError(f"stabilization: {err}") from None
        else:
            self.stabilization = None

        self.nd_list = [int(v) for v in raw.get("nd_list", [])]
        qe = raw.get("quad_exactness")
        self.quad_exactness = None if qe is None else int(qe)
        self.output = raw.get("output", "out")
        self.seed = int(raw.get("seed", 0))
        self.fd_step = float(raw.get("fd_step", 1e-5))

    def to_dict(self):
        case = {"name": self.case_name}
        if self.case_name == "case2":
            case["phi"] = self.phi
        if self.case_name == "case3":
            case["nd"] = self.nd
        out = {
            "case": case,
            "formulation": self.kind,
            "k": self.k,
            "mesh": {"sizes": self.sizes, "grading": self.grading},
            "kappa": self.kappa,
            "zeta": self.zeta,
            "nd_list": self.nd_list,
            "quad_exactness": self.quad_exactness,
            "output": self.output,
            "seed": self.seed,
            "fd_step": self.fd_step,
        }
        if self.stabilization is not None:
            st = self.stabilization
            out["stabilization"] = {
                "alpha": st.alpha, "gamma": st.gamma, "eta": st.eta,
                "theta": st.theta, "beta": st.beta,
            }
        return out

    def build_case(self):
        if self.case_name == "case1":
            return manufactured.case1(self.kappa, self.zeta)
        if self.case_name == "case2":
            return manufactured.case2(self.phi, self.kappa, self.zeta)
        return manufactured.case3(self.kappa, self.zeta)

    def build_meshes(self):
        if self.case_name == "case2":
            return sector_meshes(self.phi, self.sizes, grading=self.grading)
        return square_meshes(self.sizes)

    def formulation(self):
        return Formulation(self.kind, self.k)


def load_config(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as err:
        raise ConfigError(f"config: invalid JSON ({err})") from None
    return RunConfig(raw)


def _outdir(config, override):
    path = override or config.output
    os.makedirs(path, exist_ok=True)
    return path


# ----------------------------------------------------------------------
# subcommands


def cmd_solve(config, out_dir, threads=1):
    case = config.build_case()
    mesh = config.build_meshes()[0]
    dataset = None
    if config.case_name == "case3" and config.nd:
        dataset = build_dataset(config.nd, case.e, case.s)
    res = solve_case(mesh, config.formulation(), case, dataset=dataset,
                     params=config.stabilization,
                     quad_exactness=config.quad_exactness)

    for name, coeffs in res.solution.items():
        with open(os.path.join(out_dir, f"field_{name}.csv"), "w") as fh:
            fh.write("dof,value\n")
            for i, v in enumerate(coeffs):
                fh.write(f"{i},{float(v)!r}\n")
    from .postproc import StudyReport
    report = StudyReport(case=case.name, formulation=config.kind)
    report.add_row(res.h, res.n_dofs, res.errors)
    write_report(report, os.path.join(out_dir, "report.csv"))
    rows = nodal_error_field(res.spaces.u, res.solution["u"], case.u)
    write_nodal_error_csv(rows, os.path.join(out_dir, "nodal_error_u.csv"))
    count, worst = res.audit
    with open(os.path.join(out_dir, "second_law_audit.txt"), "w") as fh:
        fh.write(f"violations {count}\nworst {float(worst)!r}\n")
    if dataset is not None:
        write_dataset_csv(dataset, os.path.join(out_dir, "dataset.csv"))
    print(f"solved {case.name} / {config.kind} (k={config.k}) "
          f"h={res.h:.4g} dofs={res.n_dofs}")
    print(f"u_L2={res.errors['u_L2']:.4e} second-law violations={count}")
    return 0


def cmd_convergence(config, out_dir, threads=1):
    if len(config.sizes) < 3:
        raise ConfigError("mesh.sizes: convergence sweeps need >= 3 meshes")
    case = config.build_case()
    meshes = config.build_meshes()
    dataset = None
    if config.case_name == "case3" and config.nd:
        dataset = build_dataset(config.nd, case.e, case.s)
    report, results = convergence_study(
        case, config.formulation(), meshes, dataset=dataset,
        params=config.stabilization,
        quad_exactness=config.quad_exactness, threads=threads)
    write_report(report, os.path.join(out_dir, "report.csv"))
    plot_loglog(report, os.path.join(out_dir, "report.svg"))
    rates = report.rates()
    print(f"{case.name} / {config.kind} (k={config.k}) rates:")
    for col in ("u_L2", "u_H1", "lambda_L2", "lambda_H1", "e_L2", "s_L2",
                "mu_L2"):
        val = rates[col]
        print(f"  {col:10s} {'n/a' if val is None else f'{val:5.2f}'}")
    return 0


def cmd_data_study(config, out_dir, threads=1):
    if config.case_name != "case3":
        raise ConfigError("case.name: data studies require case3")
    if not config.nd_list:
        raise ConfigError("nd_list: at least one sampling resolution "
                          "required")
    case = config.build_case()
    meshes = config.build_meshes()
    for nd in config.nd_list:
        dataset = build_dataset(nd, case.e, case.s)
        report, _ = convergence_study(
            case, config.formulation(), meshes, dataset=dataset,
            params=config.stabilization,
            quad_exactness=config.quad_exactness, threads=threads)
        write_report(report, os.path.join(out_dir, f"report_nd{nd}.csv"))
        plot_loglog(report, os.path.join(out_dir, f"report_nd{nd}.svg"))
        rates = report.rates()
        u_rate = rates["u_L2"]
        print(f"nd={nd}: u_L2 rate "
              f"{'n/a' if u_rate is None else f'{u_rate:.2f}'}, "
              f"finest error {report.errors('u_L2')[-1]:.4e}")
    return 0


def cmd_verify(config, out_dir, threads=1):
    """Self-checks: manufactured solutions against the FD oracle,
    quadrature exactness, basis gradients, patch test, block structure,
    coercivity sampling."""
    failures = []

    def check(name, ok, detail=""):
        status = "PASS" if ok else "FAIL"
        print(f"[{status}] {name}" + (f" ({detail})" if detail else ""))
        if not ok:
            failures.append(name)

    if config.stabilization is not None:
        # surfaced before any solve; invalid coefficients already raised
        print("[PASS] stabilization parameter invariants")

    fd = config.fd_step
    cases = [manufactured.case1(), manufactured.case2(np.pi / 2),
             manufactured.case3()]
    for case in cases:
        res = manufactured.verify_strong_system(case, n_samples=400,
                                                fd_step=fd)
        worst = max(res.values())
        check(f"strong optimality system: {case.name}", worst <= 1e-6,
              f"max residual {worst:.2e}, fd_step {fd:g}")

    from .elements import lagrange_eval, lagrange_grad, quadrature
    import math
    ok = True
    worst = 0.0
    for d in range(1, 11):
        rule = quadrature(d)
        for a in range(d + 1):
            for b in range(d + 1 - a):
                val = float(np.sum(rule.weights
                                   * rule.points[:, 0] ** a
                                   * rule.points[:, 1] ** b))
                exact = (math.factorial(a) * math.factorial(b)
                         / math.factorial(a + b + 2))
                worst = max(worst, abs(val - exact))
    check("quadrature monomial exactness (degrees 1-10)", worst <= 1e-14,
          f"max defect {worst:.2e}")

    rng = np.random.default_rng(config.seed)
    worst = 0.0
    for degree in (1, 2, 3):
        pts = 0.1 + 0.4 * rng.random((10, 2))
        h = 1e-6
        for p in pts:
            grad = lagrange_grad(degree, p)
            fx = (lagrange_eval(degree, (p[0] + h, p[1]))
                  - lagrange_eval(degree, (p[0] - h, p[1]))) / (2 * h)
            fy = (lagrange_eval(degree, (p[0], p[1] + h))
                  - lagrange_eval(degree, (p[0], p[1] - h))) / (2 * h)
            worst = max(worst, float(np.abs(grad[:, 0] - fx).max()))
            worst = max(worst, float(np.abs(grad[:, 1] - fy).max()))
    check("basis gradients vs finite differences", worst <= 1e-7,
          f"max defect {worst:.2e}")

    check_patch(check, config)
    check_structure(check, config)
    check_coercivity(check, config)

    if failures:
        print(f"{len(failures)} verification check(s) failed")
        return 2
    print("all verification checks passed")
    return 0


def _patch_case():
    def xfun(x, y):
        return np.asarray(x, dtype=float) + 0.0 * np.asarray(y)

    def zero(x, y):
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)

    def const_vec(cx, cy):
        def f(x, y):
            base = np.zeros(np.broadcast(np.asarray(x),
                                         np.asarray(y)).shape + (2,))
            base[..., 0] = cx
            base[..., 1] = cy
            return base
        return f

    return manufactured.ManufacturedCase(
        name="patch", kappa=1.0, zeta=0.0, domain=("square",),
        u=xfun, e=const_vec(1.0, 0.0), s=const_vec(-1.0, 0.0),
        lam=zero, grad_lam=const_vec(0.0, 0.0), mu=const_vec(0.0, 0.0),
        e_data=const_vec(1.0, 0.0), s_data=const_vec(-1.0, 0.0),
        q=zero, f=zero, div_e=zero, div_s=zero, div_mu=zero)


def check_patch(check, config):
    from .forms import apply_dirichlet
    from .solver import solve_direct
    from .postproc import error_norms

    patch = _patch_case()
    mesh = unit_square_mesh(4)
    tags = ("left", "right", "bottom", "top")
    for kind in FORMULATION_KINDS:
        data = ProblemData(kappa=1.0, zeta=0.0, q=0.0, f=0.0,
                           e_data=patch.e_data, s_data=patch.s_data,
                           dirichlet={t: (patch.u, patch.lam)
                                      for t in tags})
        system = apply_dirichlet(assemble(mesh, Formulation(kind, 0), data),
                                 data)
        sol = system.split(solve_direct(system.matrix, system.rhs))
        worst = max(error_norms(system.spaces, sol, patch).values())
        check(f"patch test: {kind}", worst <= 1e-8,
              f"worst norm {worst:.2e}")


def check_structure(check, config):
    case = manufactured.case1()
    mesh = unit_square_mesh(4)
    for kind in FORMULATION_KINDS:
        data = problem_data_for(case, mesh)
        system = assemble(mesh, Formulation(kind, 0), data)
        k_off = system.offsets["lam"]
        kp = system.matrix[:k_off, k_off:]
        kd = system.matrix[k_off:, :k_off]
        defect = abs(kp + kd.T).max()
        scale = abs(system.matrix).max()
        check(f"skew coupling structure: {kind}",
              defect <= 1e-12 * scale,
              f"defect {defect:.2e} vs scale {scale:.2e}")

    zero = lambda x, y: np.zeros(np.shape(x))
    data = ProblemData(kappa=1.0, zeta=0.0, q=0.0, f=0.0,
                       e_data=case.e_data, s_data=case.s_data,
                       dirichlet={t: (zero, zero)
                                  for t in ("left", "right", "bottom",
                                            "top")})
    system = assemble(mesh, Formulation("natural", 0), data)
    coupled = 0.0
    for row in ("u", "e", "mu"):
        for col in ("s", "lam"):
            block = system.block(row, col)
            if block.nnz:
                coupled = max(coupled, abs(block).max())
            block = system.block(col, row)
            if block.nnz:
                coupled = max(coupled, abs(block).max())
    check("reaction-free decoupling", coupled == 0.0,
          f"max coupling entry {coupled:.2e}")


def check_coercivity(check, config):
    zero = lambda x, y: np.zeros(np.shape(x))
    mesh = unit_square_mesh(16)
    data = ProblemData(kappa=1.0, zeta=1.0, q=0.0, f=0.0, e_data=0.0,
                       s_data=0.0,
                       dirichlet={t: (zero, zero)
                                  for t in ("left", "right", "bottom",
                                            "top")})
    system = assemble(mesh, Formulation("eo_full", 0), data)
    cons = dirichlet_values(system, data)
    free = np.setdiff1d(np.arange(system.n_dofs),
                        np.fromiter(cons.keys(), dtype=np.int64,
                                    count=len(cons)))
    norm = stability_norm_matrix(system.spaces, 1.0, mesh_size(mesh))
    rng = np.random.default_rng(config.seed)
    worst = np.inf
    for _ in range(1000):
        z = np.zeros(system.n_dofs)
        z[free] = rng.standard_normal(len(free))
        worst = min(worst, (z @ (system.matrix @ z)) / (z @ (norm @ z)))
    check("coercivity sampling (fully stabilized)", worst >= 0.05,
          f"min Rayleigh quotient {worst:.3f}")


# ----------------------------------------------------------------------


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="gradflux",
        description="Five-field gradient/flux data reconciliation solver")
    parser.add_argument("command",
                        choices=("solve", "convergence", "data-study",
                                 "verify"))
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--out", help="output directory (defaults to the "
                        "config's 'output')")
    parser.add_argument("--threads", type=int, default=1,
                        help="concurrent solves within a sweep")
    parser.add_argument("--deterministic", action="store_true",
                        help="force single-threaded, bit-reproducible runs")
    args = parser.parse_args(argv)

    try:
        if args.config:
            config = load_config(args.config)
        else:
            config = RunConfig({})
        threads = 1 if args.deterministic else max(1, args.threads)
        out_dir = _outdir(config, args.out)
        handler = {"solve": cmd_solve, "convergence": cmd_convergence,
                   "data-study": cmd_data_study, "verify": cmd_verify}
        return handler[args.command](config, out_dir, threads=threads)
    except (ConfigError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except SolverError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
