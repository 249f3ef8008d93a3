from ._circulant import (
    CONSISTENCY_TOLERANCE,
    DENSE_ORACLE_MAX_SIZE,
    BlockInteractionSystem,
    CirculantMatrix,
    ContractionResult,
    circ_matvec,
    circ_solve_deflated,
    deflated_modes,
    dense_deflated_solve,
    pseudo_inverse_norm,
    ring_modes,
    solve_block_contraction
)
from ._errors import (
    ConsistencyError,
    ConvergenceError,
    LabError
)
from ._fingerprint import Fingerprint
from ._fit import (
    loglog_slope,
    quadratic_coefficients
)
from ._json import (
    json_dumps,
    jsonable
)
from ._parse_list import parse_list
