"""Built-in benchmark configurations with exact algebraic coordinates.

Two families ship with the package:

* irrigation networks at alpha = 1/2 in R^3 and R^4 whose branch edges run
  along e_1, e_2, ..., e_1+e_2, e_1+e_2+e_3, ...; the identity form
  certifies them globally (its rows have spectral norm one),
* the Steiner tree (alpha = 0) on the regular tetrahedron of side sqrt(3),
  certified within the family of nested multiplicities by a constant form
  built from cube roots of unity in successive coordinate planes.

For the tetrahedron the shipped form attains equality along the tree only
under one of the two symmetric source labelings; ``tetrahedron_network``
defaults to that labeling and exposes the other via
``calibrated_labels=False`` so the failing check can be reproduced.
"""

from __future__ import annotations

import math
from importlib import resources

import numpy as np

from .calibration import ConstantForm, MultiplicityFamily
from .currents import PolyhedralCurrent
from .solver import Instance

SQRT3 = math.sqrt(3.0)
SQRT6 = math.sqrt(6.0)


def data_path(name: str):
    """Path to a bundled data file (context manager friendly Traversable)."""
    return resources.files("gsnet.data").joinpath(name)


# -- irrigation, alpha = 1/2 --------------------------------------------------


def irrigation_r3_points() -> dict[str, np.ndarray]:
    return {
        "P1": np.array([-1.0, 0.0, 0.0]),
        "P2": np.array([0.0, -1.0, 0.0]),
        "P3": np.array([1.0, 1.0, -1.0]),
        "P4": np.array([2.0, 2.0, 1.0]),
        "G1": np.array([0.0, 0.0, 0.0]),
        "G2": np.array([1.0, 1.0, 0.0]),
    }


def irrigation_r3_network() -> tuple[PolyhedralCurrent, float]:
    p = irrigation_r3_points()
    e = np.eye(3, dtype=np.int64)
    segments = [
        (p["P1"], p["G1"], e[0]),
        (p["P2"], p["G1"], e[1]),
        (p["G1"], p["G2"], e[0] + e[1]),
        (p["P3"], p["G2"], e[2]),
        (p["G2"], p["P4"], e[0] + e[1] + e[2]),
    ]
    return PolyhedralCurrent.from_segments(segments), 0.5


def irrigation_r3_instance() -> Instance:
    p = irrigation_r3_points()
    return Instance(np.vstack([p["P1"], p["P2"], p["P3"]]), p["P4"], 0.5)


def irrigation_r4_points() -> dict[str, np.ndarray]:
    return {
        "P1": np.array([-1.0, 0.0, 0.0, 0.0]),
        "P2": np.array([0.0, -1.0, 0.0, 0.0]),
        "P3": np.array([1.0, 1.0, -1.0, 0.0]),
        "P4": np.array([2.0, 2.0, 1.0, -1.0]),
        "P5": np.array([3.0, 3.0, 2.0, 1.0]),
        "G1": np.array([0.0, 0.0, 0.0, 0.0]),
        "G2": np.array([1.0, 1.0, 0.0, 0.0]),
        "G3": np.array([2.0, 2.0, 1.0, 0.0]),
    }


def irrigation_r4_network() -> tuple[PolyhedralCurrent, float]:
    p = irrigation_r4_points()
    e = np.eye(4, dtype=np.int64)
    segments = [
        (p["P1"], p["G1"], e[0]),
        (p["P2"], p["G1"], e[1]),
        (p["G1"], p["G2"], e[0] + e[1]),
        (p["P3"], p["G2"], e[2]),
        (p["G2"], p["G3"], e[0] + e[1] + e[2]),
        (p["P4"], p["G3"], e[3]),
        (p["G3"], p["P5"], e[0] + e[1] + e[2] + e[3]),
    ]
    return PolyhedralCurrent.from_segments(segments), 0.5


def irrigation_r4_instance() -> Instance:
    p = irrigation_r4_points()
    return Instance(np.vstack([p["P1"], p["P2"], p["P3"], p["P4"]]), p["P5"], 0.5)


def identity_form(dim: int) -> ConstantForm:
    """Rows dx_1 ... dx_m: a global certificate at alpha = 1/2 (spectral norm 1)."""
    return ConstantForm(np.eye(dim))


def nested_family(coeff_dim: int) -> MultiplicityFamily:
    """Singletons e_i plus the nested sums e_1+...+e_j, j = 2..m."""
    members = [row for row in np.eye(coeff_dim, dtype=np.int64)]
    for j in range(2, coeff_dim + 1):
        members.append(np.array([1] * j + [0] * (coeff_dim - j), dtype=np.int64))
    return MultiplicityFamily(np.array(members))


# -- Steiner tetrahedron, alpha = 0 --------------------------------------------


def tetrahedron_points() -> dict[str, np.ndarray]:
    return {
        "P1": np.array([-0.5, SQRT3 / 2, 0.0]),
        "P2": np.array([-0.5, -SQRT3 / 2, 0.0]),
        "P3": np.array([SQRT6 / 2 - 0.5, 0.0, SQRT3 / 2]),
        "P4": np.array([SQRT6 / 2 - 0.5, 0.0, -SQRT3 / 2]),
        "S1": np.array([0.0, 0.0, 0.0]),
        "S2": np.array([SQRT6 / 2 - 1.0, 0.0, 0.0]),
    }


def tetrahedron_network(calibrated_labels: bool = True) -> tuple[PolyhedralCurrent, float]:
    """Steiner tree on the regular tetrahedron, sources P1..P3, sink P4.

    With ``calibrated_labels`` the unit flows entering at P1 and P2 carry
    labels 2 and 1 respectively, the labeling along which the shipped
    constant form attains equality; the other labeling (1 at P1, 2 at P2)
    has the same mass and boundary shape but fails the equality check.
    """
    p = tetrahedron_points()
    e = np.eye(3, dtype=np.int64)
    first, second = (e[1], e[0]) if calibrated_labels else (e[0], e[1])
    segments = [
        (p["P1"], p["S1"], first),
        (p["P2"], p["S1"], second),
        (p["S1"], p["S2"], e[0] + e[1]),
        (p["P3"], p["S2"], e[2]),
        (p["S2"], p["P4"], e[0] + e[1] + e[2]),
    ]
    return PolyhedralCurrent.from_segments(segments), 0.0


def tetrahedron_instance() -> Instance:
    p = tetrahedron_points()
    return Instance(np.vstack([p["P1"], p["P2"], p["P3"]]), p["P4"], 0.0)


def steiner_tree_form(coeff_dim: int) -> ConstantForm:
    """Constant form certifying Steiner trees among nested multiplicities.

    Row 1 and 2 are unit covectors at 120 degrees in the (x1, x2) plane;
    row k >= 3 turns the accumulated direction into the x_k plane with
    geometrically decaying x_1 and x_3..x_{k-1} components.  Every row has
    unit Euclidean norm and every nested partial sum e_1+...+e_j pairs to
    a unit covector, matching psi_0 = 1.
    """
    if coeff_dim < 2:
        raise ValueError("need at least two coefficients")
    d = coeff_dim  # square block: one coordinate plane per branching level
    rows = np.zeros((coeff_dim, d))
    rows[0, 0] = 0.5
    rows[0, 1] = SQRT3 / 2
    rows[1, 0] = 0.5
    rows[1, 1] = -SQRT3 / 2
    for k in range(3, coeff_dim + 1):
        r = rows[k - 1]
        r[0] = -1.0 / 2 ** (k - 2)
        for j in range(3, k):
            r[j - 1] = SQRT3 / 2 ** (k - j + 1)
        r[k - 1] = -SQRT3 / 2
    return ConstantForm(rows)


def tetrahedron_family() -> MultiplicityFamily:
    return nested_family(3)
