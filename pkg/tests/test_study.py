import numpy as np
import pytest

from gradflux.forms import Formulation
from gradflux.manufactured import case1, case2, case3
from gradflux.study import (convergence_study, interpolation_study,
                            problem_data_for, sector_meshes, solve_case,
                            square_meshes)
from gradflux.mesh import unit_square_mesh


def test_case1_boundary_split():
    mesh = unit_square_mesh(2)
    data = problem_data_for(case1(), mesh)
    assert set(data.dirichlet) == {"left", "right"}
    assert set(data.neumann) == {"bottom", "top"}


def test_case3_is_pure_dirichlet():
    mesh = unit_square_mesh(2)
    data = problem_data_for(case3(), mesh)
    assert set(data.dirichlet) == {"left", "right", "bottom", "top"}
    assert not data.neumann


def test_sector_meshes_scale_angular_resolution():
    meshes = sector_meshes(np.pi / 2, [2, 4], grading=1.0)
    psi = 1.5 * np.pi
    for mesh, n in zip(meshes, (2, 4)):
        arc_edges = sum(1 for t in mesh.boundary_tags if t == "arc")
        assert arc_edges == max(2, round(psi * n))


def test_solve_case_returns_record():
    res = solve_case(unit_square_mesh(6), Formulation("natural", 0),
                     case3())
    assert set(res.solution) == {"u", "e", "s", "lam", "mu"}
    assert res.errors["u_L2"] < 0.05
    assert res.h == pytest.approx(np.sqrt(2) / 6)


def test_convergence_study_rows_and_threads():
    case = case3()
    meshes = square_meshes([4, 8, 16])
    serial, _ = convergence_study(case, Formulation("natural", 0), meshes)
    threaded, _ = convergence_study(case, Formulation("natural", 0),
                                    meshes, threads=2)
    assert [r["h"] for r in serial.rows] == [r["h"] for r in threaded.rows]
    for mine, other in zip(serial.rows, threaded.rows):
        assert mine == other
    assert serial.rows[0]["h"] > serial.rows[-1]["h"]
    assert serial.rates()["u_L2"] == pytest.approx(2.0, abs=0.3)


def test_interpolation_study_tracks_singularity():
    phi = np.pi / 2
    case = case2(phi)
    meshes = sector_meshes(phi, [4, 8, 16], grading=1.0)
    report = interpolation_study(case, meshes)
    nu = np.pi / (2 * np.pi - phi)
    assert report.rates()["u_H1"] == pytest.approx(nu, abs=0.08)
