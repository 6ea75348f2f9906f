"""Binary codes: parity-check matrices, encoders, permutations and trellises."""

from .ldpc import hamming_7_4, regular_ldpc
from .parity import (AlistError, ParityCheckMatrix, SystematicEncoder, encode,
                     parse_alist, serialize_alist)
from .permutation import Permutation, build_permutation
from .reed_muller import (GeneratorStructure, bit_reversal_permutation, build_rm_code,
                          kronecker_generator, kronecker_power)
from .trellis import Edge, Trellis, build_conv_trellis, conv_encode, parse_octal_list

__all__ = [
    "AlistError", "Edge", "GeneratorStructure", "ParityCheckMatrix", "Permutation",
    "SystematicEncoder", "Trellis", "bit_reversal_permutation", "build_conv_trellis",
    "build_permutation", "build_rm_code", "conv_encode", "encode", "hamming_7_4",
    "kronecker_generator", "kronecker_power", "parse_alist", "parse_octal_list",
    "regular_ldpc", "serialize_alist",
]
