"""Nox sessions for scenario-se."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Iterable

import nox

python_versions = ["3.13"]
venv_params = ["--no-setuptools", "--no-wheel"]
sources = ["src", "tests", "benchmarks", "docs", "noxfile.py"]

nox.options.sessions = ["lint_files", "type_check_code", "test_code"]


def install(
    session: nox.Session,
    *,
    groups: Iterable[str],
    root: bool = True,
) -> None:
    """Sync exactly the given Poetry groups, plus the package when `root`."""
    command = [
        "poetry",
        "install",
        "--sync",
        f"--only={','.join(groups)}",
    ]
    if not root:
        command.append("--no-root")
    session.run_always(*command, external=True)


@nox.session(python=python_versions[-1], venv_params=venv_params)
def pre_commit(session: nox.Session) -> None:
    """Run every pre-commit hook on all files."""
    install(session, groups=["pre-commit"], root=False)
    session.run(
        "pre-commit",
        "run",
        "--all-files",
        "--show-diff-on-failure",
        "--hook-stage=manual",
    )


@nox.session(python=python_versions[-1], venv_params=venv_params)
def lint_files(session: nox.Session) -> None:
    """Lint with ruff, fixing what can be fixed."""
    install(session, groups=["linting"], root=False)
    session.run("ruff", "check", *sources, "--fix")


@nox.session(python=python_versions[-1], venv_params=venv_params)
def format_files(session: nox.Session) -> None:
    """Format with ruff."""
    install(session, groups=["linting"], root=False)
    session.run("ruff", "format", *sources)


@nox.session(python=python_versions, venv_params=venv_params)
def type_check_code(session: nox.Session) -> None:
    """Type-check with mypy against the runtime and stub packages."""
    install(session, groups=["main", "typing"])
    session.run("mypy")


@nox.session(python=python_versions, venv_params=venv_params)
def test_code(session: nox.Session) -> None:
    """Run the fast suite and the doctests under coverage."""
    install(session, groups=["main", "tests"])
    session.run(
        "pytest",
        "--cov=scenario_se",
        "--doctest-modules",
        "src",
        "tests",
        *session.posargs,
    )


@nox.session(python=python_versions[-1], venv_params=venv_params)
def test_slow(session: nox.Session) -> None:
    """Run the desk-scale training tests."""
    install(session, groups=["main", "tests"])
    session.run("pytest", "-m", "slow", *session.posargs)


@nox.session(python=python_versions[-1], venv_params=venv_params)
def benchmark(session: nox.Session) -> None:
    """Time the signal path once with asv on the current environment."""
    install(session, groups=["main", "benchmarking"])
    session.run("asv", "run", "--quick", "--environment=existing", *session.posargs)


@nox.session(python=python_versions[-1], venv_params=venv_params)
def build_docs(session: nox.Session) -> None:
    """Build the HTML docs and spell-check them."""
    install(session, groups=["main", "docs"])
    session.run("sphinx-apidoc", "-f", "-o", "docs/source", "src/scenario_se")
    session.run("sphinx-build", "-b", "html", "docs", "docs/_build/html")
    session.run("sphinx-build", "-b", "spelling", "docs", "docs/_build/spelling")
