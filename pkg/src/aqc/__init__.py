"""Simulator and verification toolkit for addressable quantum circuits."""

from .core import (AQCError, DataError, DuplicateAddress, RepeatedLetter, Sector, Skeleton,
                   SparseState, UnknownAddress, count_address_configs, inner_product,
                   make_address_word, make_circuit_state, sector)
from .evolution import apply_gate_operator, check_gate_operator, run, scatter, step, transport
from .operators import flip_data, flip_full

__all__ = [
    "AQCError", "DataError", "DuplicateAddress", "RepeatedLetter", "Sector", "Skeleton",
    "SparseState", "UnknownAddress", "count_address_configs", "inner_product",
    "make_address_word", "make_circuit_state", "sector", "apply_gate_operator",
    "check_gate_operator", "run", "scatter", "step", "transport", "flip_data", "flip_full",
]
