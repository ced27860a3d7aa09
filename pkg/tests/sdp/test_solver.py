"""Tests the interior point solver."""
import numpy as np
import pytest
from steerdistil import catalog, sampling
from steerdistil.core import errors, linalg
from steerdistil.core.maxrelent import lambda_opt
from steerdistil.sdp import SDPProblem, SolutionStatus, SolverOptions, solve
from steerdistil.sdp.solver import _is_certificate, _standard_form


def _unit_corner_problem():
    problem = SDPProblem()
    problem.add_block("X", 2)
    problem.set_objective("X", np.eye(2))
    problem.add_equality({"X": np.diag([1.0, 0.0])}, 1.0, "corner")
    return problem


def test_trace_with_fixed_corner():
    solution = solve(_unit_corner_problem())
    assert solution.status is SolutionStatus.OPTIMAL
    assert solution.primal_objective == pytest.approx(1, abs=1e-6)
    assert solution.dual_objective == pytest.approx(1, abs=1e-6)
    np.testing.assert_allclose(
        solution.primal_blocks["X"],
        np.diag([1.0, 0.0]),
        atol=1e-4,
    )


def test_complex_block_reaches_smallest_eigenvalue():
    problem = SDPProblem()
    problem.add_block("rho", 2)
    problem.set_objective("rho", catalog.PAULI_Y)
    problem.add_equality({"rho": np.eye(2)}, 1.0)
    solution = solve(problem)
    assert solution.optimal
    assert solution.primal_objective == pytest.approx(-1, abs=1e-6)
    rho = solution.primal_blocks["rho"]
    assert np.trace(rho @ catalog.PAULI_Y).real == pytest.approx(-1, abs=1e-6)


def test_free_block_is_split():
    problem = SDPProblem()
    problem.add_block("X", 2)
    problem.add_block("F", 2, psd=False)
    problem.add_equality({"X": np.eye(2), "F": np.eye(2)}, 1.0)
    form = _standard_form(problem)
    assert [(part.block, part.sign) for part in form.parts] == [
        ("X", 1),
        ("F", 1),
        ("F", -1),
    ]
    assert all(part.real for part in form.parts)


def test_redundant_equalities_are_removed():
    problem = _unit_corner_problem()
    problem.add_equality({"X": 2 * np.diag([1.0, 0.0])}, 2.0, "copy")
    solution = solve(problem)
    assert solution.optimal
    assert solution.primal_objective == pytest.approx(1, abs=1e-6)
    assert solution.dual_multipliers.shape == (2,)


def test_inconsistent_equalities():
    problem = _unit_corner_problem()
    problem.add_equality({"X": np.diag([1.0, 0.0])}, 2.0)
    solution = solve(problem)
    assert solution.status is SolutionStatus.INFEASIBLE
    assert solution.iterations == 0
    assert solution.certificate_value > 0
    slack = problem.dual_slacks(solution.certificate)["X"] - np.eye(2)
    np.testing.assert_allclose(slack, 0, atol=1e-9)


def test_conic_infeasibility_certificate():
    problem = SDPProblem()
    problem.add_block("X", 1)
    problem.add_equality({"X": np.ones((1, 1))}, -1.0)
    solution = solve(problem, SolverOptions(max_iters=60))
    assert solution.status is SolutionStatus.INFEASIBLE
    assert solution.certificate is not None
    assert solution.certificate_value > 0
    slack = problem.dual_slacks(solution.certificate)["X"]
    assert np.linalg.eigvalsh(slack)[0] >= -1e-6
    assert problem.rhs() @ solution.certificate == pytest.approx(
        solution.certificate_value,
    )


@pytest.mark.parametrize("max_iters", [1, 2, 3])
def test_unconverged_feasible_problem_is_not_infeasible(max_iters):
    solution = solve(_unit_corner_problem(), SolverOptions(max_iters=max_iters))
    assert solution.status is SolutionStatus.MAX_ITERATIONS
    assert solution.certificate is None


def test_infeasibility_certificate_is_verified():
    problem = SDPProblem()
    problem.add_block("X", 2)
    problem.add_block("F", 1, psd=False)
    problem.add_equality({"X": np.eye(2)}, -1.0)
    form = _standard_form(problem)
    options = SolverOptions()
    assert _is_certificate(form, np.array([-1.0]), options)
    assert not _is_certificate(form, np.array([1.0]), options)

    problem.add_equality({"X": np.diag([1.0, -1.0])}, 0.0)
    form = _standard_form(problem)
    assert not _is_certificate(form, np.array([-1.0, 2.0]), options)

    problem.add_equality({"F": np.ones((1, 1))}, 1.0)
    form = _standard_form(problem)
    assert not _is_certificate(form, np.array([0.0, 0.0, 1.0]), options)


@pytest.mark.parametrize("seed", range(5))
def test_random_feasible_problem(seed):
    rng = np.random.default_rng(seed)
    dim = 3
    anchor = sampling.random_density(dim, rng)
    cost = np.eye(dim) + 0.3 * linalg.require_hermitian(
        sampling.random_density(dim, rng) - np.eye(dim) / dim,
    )
    problem = SDPProblem()
    problem.add_block("X", dim)
    problem.set_objective("X", cost)
    for index in range(4):
        first = sampling.random_density(dim, rng)
        coefficient = first - sampling.random_density(dim, rng)
        problem.add_equality(
            {"X": coefficient},
            float(np.trace(coefficient @ anchor).real),
            f"c{index}",
        )
    solution = solve(problem)
    assert solution.optimal
    assert abs(solution.gap) <= 1e-6
    assert solution.primal_residual <= 1e-7
    assert solution.dual_residual <= 1e-7
    assert solution.dual_objective <= solution.primal_objective + 1e-7
    assert solution.primal_objective <= np.trace(cost @ anchor).real + 1e-7


@pytest.mark.parametrize("seed", range(4))
def test_max_relative_entropy_matches_spectral_formula(seed):
    rng = np.random.default_rng(seed)
    dim = 2 + seed % 2
    eta = sampling.random_density(dim, rng)
    rho = sampling.random_density(dim, rng)
    problem = SDPProblem()
    problem.add_block("t", 1)
    problem.add_block("S", dim)
    problem.set_objective("t", np.ones((1, 1)))
    problem.add_matrix_equality(
        {
            "t": lambda element: np.array([[np.trace(element @ rho)]]),
            "S": lambda element: -element,
        },
        eta,
        "dominance",
    )
    solution = solve(problem)
    assert solution.optimal
    assert solution.primal_objective == pytest.approx(lambda_opt(eta, rho), rel=1e-6)


@pytest.mark.parametrize(
    ("build", "match"),
    [
        (lambda problem: None, "no block"),
        (lambda problem: problem.add_block("X", 2), "no equality"),
        (
            lambda problem: (
                problem.add_block("X", 2),
                problem.add_equality({"Y": np.eye(2)}, 1.0, "unknown"),
            ),
            "unknown block",
        ),
        (
            lambda problem: (
                problem.add_block("X", 2),
                problem.add_equality({"X": np.eye(3)}, 1.0),
            ),
            "shape",
        ),
        (
            lambda problem: (
                problem.add_block("X", 2),
                problem.add_equality({"X": np.array([[0, 1], [0, 0]])}, 1.0),
            ),
            "not Hermitian",
        ),
        (
            lambda problem: (
                problem.add_block("X", 2),
                problem.add_equality({"X": np.eye(2)}, np.inf),
            ),
            "non-finite",
        ),
    ],
)
def test_ill_formed_problems(build, match):
    problem = SDPProblem()
    build(problem)
    with pytest.raises(errors.IllFormedProblemError, match=match):
        solve(problem)


def test_block_declarations():
    problem = SDPProblem()
    problem.add_block("X", 2)
    with pytest.raises(errors.IllFormedProblemError, match="twice"):
        problem.add_block("X", 3)
    with pytest.raises(errors.IllFormedProblemError, match="positive dimension"):
        problem.add_block("Y", 0)
