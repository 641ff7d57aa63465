"""
Coding
LDPC codes and the coded-transmission path
"""

from phasenoise.coding.ldpc import (
    LLR_CLAMP,
    STANDARD_CODES,
    DecodeResult,
    LdpcCode,
    ParityCheckMatrix,
    bp_decode,
    generate_regular_code,
    load_alist,
    load_code,
    parse_alist,
    save_alist,
    serialize_alist,
)
from phasenoise.coding.mapping import LlrFrame, belief_to_bit_llrs, llrs_to_symbol_priors
from phasenoise.coding.turbo import (
    CodedFrame,
    CodedLayout,
    Interleaver,
    TurboResult,
    build_coded_frame,
    turbo_run,
)

__all__ = [
    'CodedFrame',
    'CodedLayout',
    'DecodeResult',
    'Interleaver',
    'LLR_CLAMP',
    'LdpcCode',
    'LlrFrame',
    'ParityCheckMatrix',
    'STANDARD_CODES',
    'TurboResult',
    'belief_to_bit_llrs',
    'bp_decode',
    'build_coded_frame',
    'generate_regular_code',
    'llrs_to_symbol_priors',
    'load_alist',
    'load_code',
    'parse_alist',
    'save_alist',
    'serialize_alist',
    'turbo_run',
]
