"""Gridded i-IOSS certificates for continuous-time models and their transfer
to Euler / RK2 discretizations."""

import json as _json

from . import _core
from ._core import (
    Certificate,
    DomainError,
    Error,
    Grid,
    ParseError,
    System,
    TransferError,
    builtin_grid,
    builtin_model,
    builtin_names,
    consistency_defect,
    load_model,
    parse_model,
    step,
)

__version__ = _core.__version__


def check_ct(system, grid, cert, tol=1e-9, threads=0):
    return _json.loads(_core.check_ct(system, grid, cert, tol, threads))


def tau1(cert, scheme, lipschitz_f, sigma_slope=0.0, delta0=0.5):
    return _json.loads(_core.tau1(cert, scheme, lipschitz_f, sigma_slope, delta0))


def transfer(system, grid, cert, scheme, tau, samples=10000, seed=0, threads=0):
    return _json.loads(_core.transfer(system, grid, cert, scheme, tau, samples, seed, threads))


def synthesize(system, grid, kappas=(), max_iterations=400, seed=0):
    return _json.loads(_core.synthesize(system, grid, list(kappas), max_iterations, seed))


def run_cli(*args):
    """Runs the command line in-process; returns (exit_code, stdout, stderr)."""
    return _core.run_cli([str(a) for a in args])
