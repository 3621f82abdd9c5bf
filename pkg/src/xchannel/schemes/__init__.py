"""Transmission schemes for the binary fading X-Channel."""

from .codes import UndeterminedError, mac_corner_run, multicast_run, p2p_erasure_decode, p2p_erasure_encode
from .common import MESSAGES, MessageSet, SchemeReport
from .composite import xc_composite_run
from .delayed import bc_delayed_run, ic_delayed_run, swapped_ic_run, two_subphase_run
from .engine import BitStatus, MirrorMismatch
from .example2 import example2_run, reception_mask

__all__ = [
    "MESSAGES",
    "BitStatus",
    "MessageSet",
    "MirrorMismatch",
    "SchemeReport",
    "UndeterminedError",
    "bc_delayed_run",
    "example2_run",
    "ic_delayed_run",
    "mac_corner_run",
    "multicast_run",
    "p2p_erasure_decode",
    "p2p_erasure_encode",
    "reception_mask",
    "swapped_ic_run",
    "two_subphase_run",
    "xc_composite_run",
]
