"""Generator engines, distributions, and stream adapters."""

from .base import RandomStream, SeedableStream
from .bits import BitReader
from .distributions import (
    Distribution,
    Uniform01,
    UniformInt,
    uniform01,
    uniform01_block,
    uniform_int,
    uniform_int_block,
)
from .engines import (
    Ecuyer1988,
    LaggedFibonacci1279,
    Minstd,
    Mt19937,
    Randu,
    ShuffledStream,
    make_ecuyer1988,
    make_lagged_fibonacci_1279,
    make_minstd,
    make_mt19937,
    make_randu,
    make_shuffled,
)
from .adapters import (
    BitExtractStream,
    BitMaskWindowStream,
    ExternalStream,
    FileStream,
    ParallelImitatorStream,
    bit_extract,
    bit_mask_windows,
    external_stream,
    file_stream,
    parallel_imitator,
)

__all__ = [
    "RandomStream",
    "SeedableStream",
    "BitReader",
    "Distribution",
    "Uniform01",
    "UniformInt",
    "uniform01",
    "uniform01_block",
    "uniform_int",
    "uniform_int_block",
    "Ecuyer1988",
    "LaggedFibonacci1279",
    "Minstd",
    "Mt19937",
    "Randu",
    "ShuffledStream",
    "make_ecuyer1988",
    "make_lagged_fibonacci_1279",
    "make_minstd",
    "make_mt19937",
    "make_randu",
    "make_shuffled",
    "BitExtractStream",
    "BitMaskWindowStream",
    "ExternalStream",
    "FileStream",
    "ParallelImitatorStream",
    "bit_extract",
    "bit_mask_windows",
    "external_stream",
    "file_stream",
    "parallel_imitator",
]
