"""Cycle-accurate simulator of an AHB-to-APB bridge with an SPI host link."""

from .ahb_slave_if import (
    DEFAULT_DECODE_MAP,
    DecodeMap,
    DecodeRegion,
    SlaveIfState,
    compute_valid,
    decode_select,
    slave_if_tick,
)
from .apb_fsm import FsmOutputs, FsmState, fsm_next, fsm_outputs
from .apb_if import (
    HRESP_ERROR,
    HRESP_OKAY,
    ApbPeripheral,
    ApbStage,
    ResponseMode,
    compute_hresp,
    peripheral_access,
)
from .bus_types import (
    AhbRequest,
    ApbSnapshot,
    CommandFrame,
    FrameLengthError,
    ResponseFrame,
    TransType,
    decode_command,
    decode_response,
    encode_command,
    encode_response,
)
from .sim_engine import (
    BridgeCore,
    ConfigError,
    Engine,
    Scenario,
    ScenarioFrame,
    Trace,
    check_trace,
    export_csv,
    export_vcd,
    load_scenario,
    pipelined_write_burst,
    run,
    run_engine,
)
from .spi_link import SpiPins, SpiSlaveState, load_response, mapper1, mapper2, spi_tick

__version__ = "0.1.0"
