"""tenstruct: structural classes of small dense real tensors.

Modules:
    tensor_core       dense storage, contractions, sub-tensors, symmetrization
    structure_checks  Z, B, B0 and diagonal dominance in exact arithmetic
    p_analysis        alpha(T), alpha(F), P / P0 verdicts, scaling certificates
    spectral          H- and Z-eigenpairs, definiteness
    generators        seeded random tensors of each class
    cli               command-line front end
"""
__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .tensor_core import (  # noqa: F401
    DenseTensor,
    build_tensor,
    componentwise_power,
    contract_once,
    from_json_dict,
    is_symmetric,
    make_special,
    polynomial_value,
    principal_subtensor,
    symmetrize,
    to_json_dict,
)
from .structure_checks import (  # noqa: F401
    Tolerance,
    b_classify,
    beta_quantity,
    classify,
    diagonal_dominance,
    entry_necessary_conditions,
    is_z_tensor,
    row_norm_bound,
)
from .p_analysis import (  # noqa: F401
    AlphaConfig,
    alpha_estimate,
    f_operator,
    p_classify,
    scaling_certificate,
    t_operator,
)
from .spectral import (  # noqa: F401
    EigenConfig,
    definiteness_check,
    extreme_z_values,
    h_eigenpairs,
    z_eigenpairs,
)
from .generators import GenSpec, generate  # noqa: F401
