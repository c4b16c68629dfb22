"""Exact point-flatness tests for second-order PDE systems in one dependent variable.

A system ``y_{x^i x^j} = F^{i,j}(x, y, y_x)`` is point-equivalent to
``Y_{X^i X^j} = 0`` exactly when its right-hand sides are cubic in the
gradient with a prescribed monomial pattern and the four coefficient tables
satisfy a closed first-order differential system.  This package decides that
property with exact rational arithmetic and verifies the constructive
direction on synthesized instances.
"""

from jetflat.auxiliary import (
    PiTable,
    ThetaFields,
    compat_residuals,
    cross_diff_residuals,
    pi_from_squares,
    quasi_invert,
    six_family_residuals,
    split_families,
    theta_from_squares,
    theta_system_residuals,
)
from jetflat.cubic import (
    CubicForm,
    NotCubicForm,
    chern_tensor_identity,
    coefficient_annihilation,
    coefficient_tables,
    derived_flatness_residuals,
    expand_cubic,
    extract_cubic,
    flatness_residuals,
    is_flat,
)
from jetflat.jetspace import JetContext, PdeSystem, integrability_residuals, total_derivative
from jetflat.symcore import RationalExpr, VarUniverse
from jetflat.transform import (
    PointTransformation,
    VectorField,
    ghlm_from_squares,
    jacobian,
    prolong2,
    pullback_residual,
    squares,
    synthesize,
)

__version__ = "0.1.0"

__all__ = [
    "CubicForm",
    "JetContext",
    "NotCubicForm",
    "PdeSystem",
    "PiTable",
    "PointTransformation",
    "RationalExpr",
    "ThetaFields",
    "VarUniverse",
    "VectorField",
    "chern_tensor_identity",
    "coefficient_annihilation",
    "coefficient_tables",
    "compat_residuals",
    "cross_diff_residuals",
    "derived_flatness_residuals",
    "expand_cubic",
    "extract_cubic",
    "flatness_residuals",
    "ghlm_from_squares",
    "integrability_residuals",
    "is_flat",
    "jacobian",
    "pi_from_squares",
    "prolong2",
    "pullback_residual",
    "quasi_invert",
    "six_family_residuals",
    "split_families",
    "squares",
    "synthesize",
    "theta_from_squares",
    "theta_system_residuals",
    "total_derivative",
]
