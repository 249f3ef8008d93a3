from ._certify import Certify
from ._check_kernel import CheckKernel
from ._circulant_check import CirculantCheck
from ._construct import Construct
from ._error_scan import ErrorScan
from ._solve_reduced import SolveReduced

COMMANDS = {
    command.NAME: command
    for command in (Construct, ErrorScan, SolveReduced, CheckKernel, CirculantCheck, Certify)
}
