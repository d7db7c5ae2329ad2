"""Constant coefficient-valued 1-forms and mass-minimality certificates.

A candidate certificate is a constant form given by an (m, d) matrix whose
row i is the covector paired with the i-th coefficient.  Constant forms are
closed, so certifying a current amounts to two checks:

  (i)   along every segment the form attains psi of the multiplicity,
  (iii) for every admissible multiplicity h the form stays below psi(h),
        where the sup over unit directions of <w; t, h> equals the
        Euclidean norm of sum_i h_i w_i.

When both hold, the pairing <form, T> computed from the boundary through
the linear potential x -> W x is a lower bound on the mass of every
competitor with the same boundary and admissible multiplicities, and it
matches the mass of T itself, which is therefore minimal in that class.
Check (iii) quantifies over all integer vectors, which cannot be
enumerated; global certificates are granted only under a registered
duality argument (alpha = 1/2 with spectral norm at most one, where
Cauchy-Schwarz covers every h), otherwise the certificate is relative to
the explicit finite family that was checked.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .currents import PolyhedralCurrent
from .norms import AlphaNorm, comass

STATUS_GLOBAL = "certified-global"
STATUS_IN_FAMILY = "certified-in-family"
STATUS_FAILED = "failed"


@dataclass(frozen=True)
class ConstantForm:
    """Constant (m, d) matrix of covector rows."""

    rows: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rows", np.asarray(self.rows, dtype=float))
        if self.rows.ndim != 2:
            raise ValueError("form rows must be an (m, d) matrix")
        if not np.isfinite(self.rows).all():
            raise ValueError("form entries must be finite")

    @property
    def coeff_dim(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def potential(self, x) -> np.ndarray:
        """Linear potential with d(potential_i) = row_i, evaluated at x."""
        return np.asarray(x, dtype=float) @ self.rows.T


@dataclass(frozen=True)
class MultiplicityFamily:
    """Finite set of nonzero integer multiplicity vectors."""

    members: np.ndarray  # (k, m) integer

    def __post_init__(self):
        members = np.asarray(self.members)
        if members.ndim != 2 or len(members) == 0:
            raise ValueError("family must be a nonempty (k, m) integer array")
        if not np.all(members == np.round(members)):
            raise ValueError("family members must be integer vectors")
        members = np.round(members).astype(np.int64)
        if not members.any(axis=1).all():
            raise ValueError("family members must be nonzero")
        object.__setattr__(self, "members", members)

    @property
    def coeff_dim(self) -> int:
        return self.members.shape[1]

    def __contains__(self, h) -> bool:
        h = np.asarray(h)
        return bool((self.members == h).all(axis=1).any())


@dataclass(frozen=True)
class SegmentCheck:
    segment: int
    pairing: float
    psi: float
    passed: bool


@dataclass(frozen=True)
class MemberCheck:
    member: tuple[int, ...]
    attained: float  # sup over unit t of <w; t, h> = |sum h_i w_i|_2
    psi: float
    passed: bool


@dataclass(frozen=True)
class Certificate:
    form: ConstantForm
    condition_i: list[SegmentCheck]
    condition_iii: list[MemberCheck]
    family: MultiplicityFamily
    theta_in_family: bool
    global_argument: bool
    lower_bound: float
    mass: float
    status: str

    @property
    def certified(self) -> bool:
        return self.status in (STATUS_GLOBAL, STATUS_IN_FAMILY)


def _check_dims(form: ConstantForm, coeff_dim: int, dim: int | None = None) -> None:
    if form.coeff_dim != coeff_dim:
        raise ValueError(
            f"form has {form.coeff_dim} rows, expected coeff_dim = {coeff_dim}"
        )
    if dim is not None and form.dim != dim:
        raise ValueError(f"form acts on R^{form.dim}, current lives in R^{dim}")


def check_condition_i(
    form: ConstantForm,
    current: PolyhedralCurrent,
    norm: AlphaNorm,
    tol: float = 1e-9,
) -> list[SegmentCheck]:
    """Per segment: does <form; tangent, multiplicity> equal psi(multiplicity)?"""
    _check_dims(form, current.coeff_dim, current.dim)
    report = []
    if current.n_segments:
        tangents = current.tangents()
        pairings = np.einsum("sm,md,sd->s", current.theta.astype(float), form.rows, tangents)
        psis = np.atleast_1d(norm.psi(current.theta.astype(float)))
        for s, (val, psi) in enumerate(zip(pairings, psis)):
            report.append(
                SegmentCheck(s, float(val), float(psi), bool(abs(val - psi) <= tol))
            )
    return report


def check_condition_iii(
    form: ConstantForm, family: MultiplicityFamily, norm: AlphaNorm
) -> list[MemberCheck]:
    """Per family member h: is |sum_i h_i w_i|_2 at most psi(h)?

    The left side is exact for constant forms: the sup over unit directions
    t of <w; t, h> is the Euclidean norm of the combined covector.
    """
    _check_dims(form, family.coeff_dim)
    report = []
    for h in family.members:
        attained = float(np.linalg.norm(h.astype(float) @ form.rows))
        psi = float(norm.psi(h.astype(float)))
        report.append(MemberCheck(tuple(int(x) for x in h), attained, psi, attained <= psi + 1e-12))
    return report


def pairing(form: ConstantForm, current: PolyhedralCurrent) -> float:
    """<form, T>: sum over segments of length times sum_i theta_i <w_i, tau>."""
    _check_dims(form, current.coeff_dim, current.dim)
    if current.n_segments == 0:
        return 0.0
    vals = np.einsum(
        "sm,md,sd->s", current.theta.astype(float), form.rows, current.tangents()
    )
    return float(np.dot(vals, current.lengths()))


def certify(
    form: ConstantForm,
    current: PolyhedralCurrent,
    norm: AlphaNorm,
    family: MultiplicityFamily,
    tol: float = 1e-9,
) -> Certificate:
    """Run both conditions and assemble an optimality certificate.

    The lower bound is the boundary pairing sum_j <p_j, W x_j>, which equals
    <form, T> for any current with that boundary since the form is exact.
    Status ``certified-global`` needs the registered alpha = 1/2 spectral
    argument; ``certified-in-family`` needs every multiplicity of the
    current to belong to the checked family.
    """
    boundary = current.boundary()
    if len(boundary) == 0:
        raise ValueError("cannot certify a current with empty boundary")
    _check_dims(form, current.coeff_dim, current.dim)
    if family.coeff_dim != current.coeff_dim:
        raise ValueError("family coefficient dimension does not match the current")

    cond_i = check_condition_i(form, current, norm, tol)
    cond_iii = check_condition_iii(form, family, norm)
    cond_i_ok = all(c.passed for c in cond_i)
    cond_iii_ok = all(c.passed for c in cond_iii)
    theta_in_family = all(th in family for th in current.theta)

    global_argument = norm.alpha == 0.5 and comass(form.rows, norm) <= 1.0 + tol

    lower_bound = float(
        np.sum(boundary.weights.astype(float) * form.potential(boundary.points))
    )
    mass = current.mass(norm)
    tight = abs(mass - lower_bound) <= tol * max(1.0, abs(mass))

    if cond_i_ok and global_argument and tight:
        status = STATUS_GLOBAL
    elif cond_i_ok and cond_iii_ok and theta_in_family and tight:
        status = STATUS_IN_FAMILY
    else:
        status = STATUS_FAILED
    return Certificate(
        form=form,
        condition_i=cond_i,
        condition_iii=cond_iii,
        family=family,
        theta_in_family=theta_in_family,
        global_argument=global_argument,
        lower_bound=lower_bound,
        mass=mass,
        status=status,
    )


# -- calibration file format --------------------------------------------------


def calibration_to_dict(form: ConstantForm, family: MultiplicityFamily) -> dict:
    return {
        "coeff_dim": form.coeff_dim,
        "dim": form.dim,
        "rows": form.rows.tolist(),
        "family": family.members.tolist(),
    }


def calibration_from_dict(data: dict) -> tuple[ConstantForm, MultiplicityFamily]:
    rows = np.asarray(data["rows"], dtype=float)
    if rows.shape != (int(data["coeff_dim"]), int(data["dim"])):
        raise ValueError("calibration rows do not match declared dimensions")
    return ConstantForm(rows), MultiplicityFamily(np.asarray(data["family"]))


def save_calibration(form: ConstantForm, family: MultiplicityFamily, path) -> None:
    Path(path).write_text(json.dumps(calibration_to_dict(form, family), indent=1))


def load_calibration(path) -> tuple[ConstantForm, MultiplicityFamily]:
    return calibration_from_dict(json.loads(Path(path).read_text()))
