"""qdifab: simulator and configuration compiler for a multi-style
asynchronous FPGA logic block, with side-channel property checks."""

from .encodings import (
    Protocol,
    SignalSpec,
    ValueCode,
    CodeKind,
    encode_4ph,
    encode_4ph_null,
    decode_4ph,
    ledr_next,
    edge_next,
    signal_parity,
)
from .plb import LutTable, PlbConfig, PlbState, plb_step, plb_reset, validate_config
from .simulator import DelayModel, Fabric, run, check_single_toggle, check_no_early_evaluation

__version__ = "0.1.0"
