"""Output stage pass-through, Hresp generation and the closed-loop
peripheral register files."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ahb2apb.apb_fsm import FsmOutputs
from ahb2apb.apb_if import (
    HRESP_ERROR,
    HRESP_OKAY,
    ApbPeripheral,
    ApbStage,
    PeripheralNotSelected,
    ResponseMode,
    apb_stage,
    compute_hresp,
    dump_register_file,
    load_register_file,
    peripheral_access,
)
from ahb2apb.bus_types import ApbSnapshot

MASK32 = 0xFFFF_FFFF

fsm_outputs_strategy = st.integers(0, 3).flatmap(
    lambda s: st.builds(
        FsmOutputs,
        pwrite=st.integers(0, 1),
        penable=st.just(0) if s == 0 else st.integers(0, 1),
        pselx=st.just(0 if s == 0 else 1 << (s - 1)),
        paddr=st.integers(0, MASK32),
        pwdata=st.integers(0, MASK32),
        hreadyout=st.integers(0, 1),
    )
)


class TestApbStagePassThrough:
    def test_write_fields_pass_through(self):
        outs = FsmOutputs(pwrite=1, penable=1, pselx=0b001, paddr=0x8000_000C,
                          pwdata=0xFFFF_FFFF, hreadyout=1)
        snap = apb_stage(outs)
        assert snap.pwrite == 1
        assert snap.penable == 1
        assert snap.paddr == 0x8000_000C
        assert snap.pwdata == 0xFFFF_FFFF

    def test_all_zero_outputs_give_all_zero_snapshot(self):
        assert apb_stage(FsmOutputs()) == ApbSnapshot()

    @given(fsm_outputs_strategy)
    def test_every_field_equals_its_input(self, outs):
        snap = apb_stage(outs)
        assert snap.paddr == outs.paddr
        assert snap.pwdata == outs.pwdata
        assert snap.pselx == outs.pselx
        assert snap.pwrite == outs.pwrite
        assert snap.penable == outs.penable
        assert snap.hreadyout == outs.hreadyout
        assert snap.hresp == 0 and snap.hrdata == 0


class TestComputeHresp:
    def test_mapped_transfer_is_okay(self):
        assert compute_hresp(1, 1) == HRESP_OKAY

    def test_no_transfer_is_okay(self):
        assert compute_hresp(0, 0) == HRESP_OKAY
        assert compute_hresp(0, 1) == HRESP_OKAY

    def test_attempted_transfer_with_decode_miss_errors(self):
        assert compute_hresp(1, 0) == HRESP_ERROR

    def test_only_okay_and_error_are_produced(self):
        assert {compute_hresp(a, h) for a in (0, 1) for h in (0, 1)} <= {0b00, 0b01}


def enabled_write(select, paddr, pwdata):
    return ApbSnapshot(paddr=paddr, pwdata=pwdata, pselx=1 << select,
                       pwrite=1, penable=1, hreadyout=1)


def enabled_read(select, paddr):
    return ApbSnapshot(paddr=paddr, pselx=1 << select, pwrite=0, penable=1,
                       hreadyout=1)


class TestPeripheralAccess:
    def test_write_then_read_returns_written_value(self):
        p = ApbPeripheral(2, {})
        p, _ = peripheral_access(p, enabled_write(2, 0x8C00_0000, 0x8765_4321))
        p, data = peripheral_access(p, enabled_read(2, 0x8C00_0000))
        assert data == 0x8765_4321

    def test_read_absent_address_returns_zero(self):
        p = ApbPeripheral(0, {})
        _, data = peripheral_access(p, enabled_read(0, 0x8000_0040))
        assert data == 0

    def test_read_has_no_side_effect(self):
        p = ApbPeripheral(0, {0x8000_0000: 0x11})
        p2, _ = peripheral_access(p, enabled_read(0, 0x8000_0000))
        assert p2.registers == p.registers

    def test_write_returns_prior_value(self):
        p = ApbPeripheral(1, {0x8400_0000: 0xAA})
        p, prior = peripheral_access(p, enabled_write(1, 0x8400_0000, 0xBB))
        assert prior == 0xAA
        assert p.registers[0x8400_0000] == 0xBB

    def test_wrong_select_raises(self):
        p = ApbPeripheral(0, {})
        with pytest.raises(PeripheralNotSelected):
            peripheral_access(p, enabled_write(1, 0x8400_0000, 1))

    def test_access_outside_enable_phase_raises(self):
        p = ApbPeripheral(0, {})
        setup = ApbSnapshot(pselx=0b001, pwrite=1, paddr=0x8000_0000)
        with pytest.raises(PeripheralNotSelected):
            peripheral_access(p, setup)

    def test_accesses_are_word_addressed(self):
        p = ApbPeripheral(0, {})
        p, _ = peripheral_access(p, enabled_write(0, 0x8000_0002, 0x5A))
        _, data = peripheral_access(p, enabled_read(0, 0x8000_0000))
        assert data == 0x5A

    def test_unaligned_initial_registers_rejected(self):
        with pytest.raises(ValueError):
            ApbPeripheral(0, {0x8000_0001: 0})


class TestApbStageResponsePath:
    def test_open_loop_hrdata_is_prdata_at_enable(self):
        stage = ApbStage(ResponseMode.OPEN_LOOP)
        enable = FsmOutputs(pwrite=1, penable=1, pselx=0b001, paddr=0x8000_0000,
                            pwdata=0x1, hreadyout=1)
        snap = stage.cycle(enable, prdata_latch=0x1234_5678, attempted=0, decode_hit=1)
        assert snap.hrdata == 0x1234_5678

    def test_hrdata_holds_between_enables(self):
        stage = ApbStage(ResponseMode.OPEN_LOOP)
        enable = FsmOutputs(pwrite=1, penable=1, pselx=0b001, hreadyout=1)
        stage.cycle(enable, prdata_latch=0xAB, attempted=0, decode_hit=1)
        idle = stage.cycle(FsmOutputs(hreadyout=1), prdata_latch=0xCD,
                           attempted=0, decode_hit=0)
        assert idle.hrdata == 0xAB

    def test_closed_loop_write_then_read(self):
        stage = ApbStage(ResponseMode.CLOSED_LOOP, (ApbPeripheral(2, {}),))
        write = FsmOutputs(pwrite=1, penable=1, pselx=0b100, paddr=0x8C00_0000,
                           pwdata=0x8765_4321, hreadyout=1)
        stage.cycle(write, prdata_latch=0, attempted=0, decode_hit=1)
        read = FsmOutputs(pwrite=0, penable=1, pselx=0b100, paddr=0x8C00_0000,
                          hreadyout=1)
        snap = stage.cycle(read, prdata_latch=0, attempted=0, decode_hit=1)
        assert snap.hrdata == 0x8765_4321
        assert stage.peripheral(2).registers[0x8C00_0000] == 0x8765_4321

    def test_closed_loop_missing_peripheral_reads_zero(self):
        stage = ApbStage(ResponseMode.CLOSED_LOOP)
        read = FsmOutputs(pwrite=0, penable=1, pselx=0b001, hreadyout=1)
        snap = stage.cycle(read, prdata_latch=0x55, attempted=0, decode_hit=1)
        assert snap.hrdata == 0

    def test_state_only_changes_on_enabled_writes(self):
        stage = ApbStage(ResponseMode.CLOSED_LOOP, (ApbPeripheral(0, {}),))
        setup = FsmOutputs(pwrite=1, penable=0, pselx=0b001, paddr=0x8000_0000,
                           pwdata=0x99)
        stage.cycle(setup, prdata_latch=0, attempted=0, decode_hit=1)
        assert stage.peripheral(0).registers == {}

    def test_hresp_reports_decode_miss(self):
        stage = ApbStage(ResponseMode.OPEN_LOOP)
        snap = stage.cycle(FsmOutputs(hreadyout=1), prdata_latch=0,
                           attempted=1, decode_hit=0)
        assert snap.hresp == HRESP_ERROR

    def test_duplicate_peripheral_selects_rejected(self):
        with pytest.raises(ValueError):
            ApbStage(ResponseMode.CLOSED_LOOP,
                     (ApbPeripheral(0, {}), ApbPeripheral(0, {})))


class TestRegisterFileText:
    def test_round_trip(self):
        regs = {0x8000_0000: 0x1234_5678, 0x8C00_0010: 0xFFFF_FFFF}
        assert load_register_file(dump_register_file(regs)) == regs

    def test_comments_and_blanks_skipped(self):
        text = "# init\n\n80000000 deadbeef  # note\n"
        assert load_register_file(text) == {0x8000_0000: 0xDEADBEEF}

    def test_prefixed_hex_accepted(self):
        assert load_register_file("0x8000_0000".replace("_", "") + " 0x10\n") == {
            0x8000_0000: 0x10
        }

    def test_malformed_line_rejected(self):
        with pytest.raises(ValueError):
            load_register_file("80000000\n")
