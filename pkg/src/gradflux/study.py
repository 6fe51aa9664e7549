"""End-to-end single solves and convergence sweeps.

Bridges the manufactured cases to problem data (boundary conditions per
domain), runs assemble / constrain / solve, and folds per-mesh error
records into study reports.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import postproc
from .data_assign import assign_to_elements
from .forms import ProblemData, apply_dirichlet, assemble
from .mesh import mesh_size, reentrant_mesh, unit_square_mesh
from .postproc import StudyReport, error_norms, second_law_audit
from .solver import solve_direct


def problem_data_for(case, mesh, dataset=None):
    """Sources, data fields and boundary conditions for one case.

    Case 1 mixes Dirichlet sides (left/right) with Neumann flux data
    (bottom/top); the corner problems and the data-assignment problem
    use Dirichlet conditions for the potential and the multiplier on the
    whole boundary.  A dataset replaces the pointwise data fields by
    their element-constant assignment.
    """
    if dataset is not None:
        if case.domain[0] != "square":
            raise ValueError("sampled data sets require the unit square")
        e_data, s_data = assign_to_elements(mesh, dataset)
    else:
        e_data, s_data = case.e_data, case.s_data

    present = set(mesh.boundary_tags)
    dirichlet = {}
    neumann = {}
    if case.name == "case1":
        for tag in ("left", "right"):
            dirichlet[tag] = (case.u, case.lam)
        for tag in ("bottom", "top"):
            neumann[tag] = (_normal_trace(case.s), _normal_trace(case.mu))
    else:
        for tag in present:
            dirichlet[tag] = (case.u, case.lam)

    return ProblemData(kappa=case.kappa, zeta=case.zeta, q=case.q,
                       f=case.f, e_data=e_data, s_data=s_data,
                       dirichlet=dirichlet, neumann=neumann)


def _normal_trace(vector_field):
    def trace(x, y, nx, ny):
        vals = vector_field(x, y)
        return vals[..., 0] * nx + vals[..., 1] * ny
    return trace


@dataclass
class SolveResult:
    mesh: object
    spaces: object
    solution: dict
    errors: dict
    audit: tuple
    h: float
    n_dofs: int


def solve_case(mesh, formulation, case, dataset=None, params=None,
               quad_exactness=None):
    """Assemble, constrain and solve one problem; returns fields plus
    its error record and second-law audit.

    The assembled matrix is released once solved so sweeps hold only
    coefficient vectors.
    """
    data = problem_data_for(case, mesh, dataset)
    system = assemble(mesh, formulation, data, params=params,
                      quad_exactness=quad_exactness)
    constrained = apply_dirichlet(system, data)
    del system
    x = solve_direct(constrained.matrix, constrained.rhs)
    solution = constrained.split(x)
    errors = error_norms(constrained.spaces, solution, case,
                         quad_exactness=quad_exactness)
    audit = second_law_audit(constrained.spaces, solution)
    return SolveResult(mesh=mesh, spaces=constrained.spaces,
                       solution=solution, errors=errors, audit=audit,
                       h=mesh_size(mesh), n_dofs=constrained.n_dofs)


def square_meshes(sizes):
    return [unit_square_mesh(n) for n in sizes]


def sector_meshes(phi, sizes, grading=1.0):
    """Radial/angular refinement in lockstep, aspect ratio near one on
    the outer ring."""
    psi = 2.0 * np.pi - phi
    meshes = []
    for n in sizes:
        n_angular = max(2, int(round(psi * n)))
        meshes.append(reentrant_mesh(phi, n, n_angular, grading=grading))
    return meshes


def convergence_study(case, formulation, meshes, dataset=None, params=None,
                      quad_exactness=None, threads=1):
    """One solve per mesh, folded into a StudyReport.

    Returns (report, results).  Meshes must be ordered coarse to fine.
    Solves are independent and may run concurrently; the report is
    assembled in mesh order regardless.
    """
    label = case.name if dataset is None else \
        f"{case.name}[nd={dataset.nd}]"
    report = StudyReport(case=label, formulation=_describe(formulation))

    def run(mesh):
        try:
            return solve_case(mesh, formulation, case, dataset=dataset,
                              params=params,
                              quad_exactness=quad_exactness)
        except Exception as err:
            raise type(err)(
                f"solve failed on mesh with h = {mesh_size(mesh):.6g} "
                f"({mesh.n_triangles} elements): {err}") from err

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, meshes))
    else:
        results = [run(mesh) for mesh in meshes]

    for res in results:
        report.add_row(res.h, res.n_dofs, res.errors)
    return report, results


def interpolation_study(case, meshes, degree=1):
    """Best-approximation reference: nodal interpolation of the exact
    potential on each mesh, measured in the same norms."""
    from .elements import build_space, interpolate

    report = StudyReport(case=case.name, formulation="interpolation")
    for mesh in meshes:
        space = build_space(mesh, "CG", degree, "scalar")
        coeffs = interpolate(space, case.u)
        rule_exactness = 2 * degree + 3
        from .elements import (eval_scalar, eval_scalar_gradient,
                               physical_points)
        from .elements import quadrature as quad_rule
        rule = quad_rule(rule_exactness)
        W = mesh.jacobian_dets[:, None] * rule.weights[None, :]
        phys = physical_points(mesh, rule.points)
        x, y = phys[..., 0], phys[..., 1]
        diff = eval_scalar(space, coeffs, rule.points) - case.u(x, y)
        gdiff = eval_scalar_gradient(space, coeffs, rule.points) \
            - case.e(x, y)
        errors = {col: 1.0 for col in postproc.ERROR_COLUMNS}
        errors["u_L2"] = float(np.sqrt(np.sum(W * diff ** 2)))
        errors["u_H1"] = float(np.sqrt(np.sum(W * np.sum(gdiff ** 2,
                                                         axis=-1))))
        report.add_row(mesh_size(mesh), space.n_dofs, errors)
    return report


def _describe(formulation):
    return f"{formulation.kind}(k={formulation.k})"
