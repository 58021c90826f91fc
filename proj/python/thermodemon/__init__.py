"""Single-molecule heat engines, bit erasure and second-law bookkeeping.

Energies are in units of kT, entropies in bits.
"""

from ._core import (
    PreconditionError,
    __version__,
    audit,
    blind_reset_tape,
    compress,
    derive_seed,
    endemon,
    expected_net_work,
    known_reset_tape,
    product_ensemble,
    reset_pair_via_copy,
    restore_to_one,
    run_cli,
    szilard,
    trapdoor,
    uniform_ensemble,
)

__all__ = [
    "PreconditionError",
    "__version__",
    "audit",
    "blind_reset_tape",
    "compress",
    "derive_seed",
    "endemon",
    "expected_net_work",
    "known_reset_tape",
    "product_ensemble",
    "reset_pair_via_copy",
    "restore_to_one",
    "run_cli",
    "szilard",
    "trapdoor",
    "uniform_ensemble",
]
