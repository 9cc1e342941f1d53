import math
import random

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from dctcpmap.core_map import (
    LinkParams,
    MapState,
    SenderParams,
    bandwidth_delay_product,
    border,
    iterate_batch,
    mark,
    orbit,
    queue_next,
    step,
)

GBPS10 = 10e9


def link(d=30e-6, k=15.0, b=200.0, c=GBPS10, m=8192.0):
    return LinkParams(capacity=c, prop_delay=d, packet_size=m, buffer=b, threshold=k)


# hand arithmetic: 1e10 * 30e-6 / 8192 = 300000 / 8192
BDP_30US = 36.62109375


class TestBandwidthDelayProduct:
    def test_thirty_microseconds(self):
        assert bandwidth_delay_product(link()) == pytest.approx(BDP_30US, rel=1e-15)

    def test_zero_delay(self):
        assert bandwidth_delay_product(link(d=0.0)) == 0.0

    def test_unit_case(self):
        assert bandwidth_delay_product(link(c=8192.0, d=1.0)) == 1.0


class TestBorder:
    def test_k15_thirty_microseconds(self):
        assert border(link(k=15.0)) == pytest.approx(15.0 + BDP_30US, rel=1e-15)

    def test_zero_delay_is_threshold(self):
        assert border(link(k=20.0, d=0.0)) == 20.0

    def test_one_nanosecond_border_hugs_threshold(self):
        # 1e10 * 1e-9 = 10 bits in flight = 10/8192 packets
        assert border(link(k=20.0, d=1e-9)) == pytest.approx(20.0 + 10.0 / 8192.0, rel=1e-15)


class TestQueueNext:
    def test_figure_three_operating_point(self):
        assert queue_next(71.62, link()) == pytest.approx(35.0, abs=0.01)

    def test_window_equal_to_pipe_gives_empty_queue(self):
        lk = link()
        assert queue_next(bandwidth_delay_product(lk), lk) == 0.0

    def test_saturates_at_buffer(self):
        lk = link()
        assert queue_next(lk.buffer + bandwidth_delay_product(lk) + 100, lk) == lk.buffer

    def test_small_window_clamped_at_zero(self):
        assert queue_next(1.0, link()) == 0.0


class TestMark:
    def test_at_threshold_unmarked(self):
        assert mark(15.0, link(k=15.0)) is False

    def test_just_above_threshold_marked(self):
        assert mark(15.0 + 1e-9, link(k=15.0)) is True

    def test_empty_queue(self):
        assert mark(0.0, link()) is False


class TestStep:
    def test_full_congestion_halves_window(self):
        lk = link(d=0.0, k=15.0)
        nxt, rec = step(MapState(40.0, 1.0), lk, SenderParams(0.0625, 1.0))
        assert rec.marked
        assert nxt.window == 20.0

    def test_additive_increase_below_border(self):
        lk = link()
        nxt, rec = step(MapState(10.0, 0.0), lk, SenderParams(0.0625, 1.0))
        assert not rec.marked
        assert nxt.window == 11.0
        assert nxt.alpha == 0.0

    def test_first_mark_sets_alpha_to_g(self):
        lk = link(d=0.0)
        nxt, _ = step(MapState(30.0, 0.0), lk, SenderParams(1 / 16, 1.0))
        assert nxt.alpha == 0.0625
        assert nxt.window == 30.0  # alpha_k = 0 means no cut yet

    def test_updates_use_pre_step_alpha(self):
        lk = link(d=0.0)
        nxt, _ = step(MapState(40.0, 0.5), lk, SenderParams(0.5, 1.0))
        assert nxt.window == 40.0 * 0.75
        assert nxt.alpha == 0.75

    def test_record_fields(self):
        lk = link()
        _, rec = step(MapState(71.62, 0.2), lk, SenderParams(0.0625), k=7)
        assert rec.k == 7
        assert rec.window == 71.62 and rec.alpha == 0.2
        assert rec.queue == queue_next(71.62, lk)
        assert rec.marked
        assert rec.rtt == pytest.approx(30e-6 + rec.queue * 8192 / GBPS10, rel=1e-15)


class TestOrbit:
    def test_single_sample_is_initial_state(self):
        lk = link()
        recs = orbit(MapState(1.0, 0.0), lk, SenderParams(0.0625), 0, 1)
        assert len(recs) == 1
        r = recs[0]
        assert (r.k, r.window, r.alpha, r.queue) == (0, 1.0, 0.0, queue_next(1.0, lk))

    def test_return_map_setup_stays_bounded(self):
        lk = link(d=30e-6, k=15.0)
        recs = orbit(MapState(), lk, SenderParams(1 / 16, 1.0), 5000, 1000)
        assert all(0.0 <= r.queue <= lk.buffer for r in recs)
        assert all(0.0 <= r.alpha <= 1.0 for r in recs)

    def test_transient_is_prefix_discard(self):
        lk, sd = link(), SenderParams(0.05, 1.5)
        full = orbit(MapState(3.0, 0.2), lk, sd, 0, 300)
        tail = orbit(MapState(3.0, 0.2), lk, sd, 200, 100)
        assert tail == full[200:]

    def test_deterministic(self):
        lk, sd = link(), SenderParams(0.042, 2.0)
        assert orbit(MapState(), lk, sd, 100, 500) == orbit(MapState(), lk, sd, 100, 500)

    def test_bad_counts(self):
        with pytest.raises(ValueError):
            orbit(MapState(), link(), SenderParams(0.1), -1, 5)
        with pytest.raises(ValueError):
            orbit(MapState(), link(), SenderParams(0.1), 0, 0)


class TestValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(capacity=0.0),
            dict(prop_delay=-1e-9),
            dict(packet_size=0.0),
            dict(threshold=0.0),
            dict(threshold=200.0),
            dict(threshold=250.0),
        ],
    )
    def test_link(self, kwargs):
        base = dict(capacity=1e10, prop_delay=1e-6, packet_size=8192.0, buffer=200.0, threshold=20.0)
        base.update(kwargs)
        with pytest.raises(ValueError):
            LinkParams(**base)

    @pytest.mark.parametrize("g,gamma", [(0.0, 1.0), (1.0, 1.0), (1.5, 1.0), (0.1, 0.0), (0.1, -2.0)])
    def test_sender(self, g, gamma):
        with pytest.raises(ValueError):
            SenderParams(g, gamma)

    @pytest.mark.parametrize("w,a", [(0.0, 0.1), (-1.0, 0.1), (1.0, -0.01), (1.0, 1.01)])
    def test_state(self, w, a):
        with pytest.raises(ValueError):
            MapState(w, a)


# --- properties -------------------------------------------------------------

links = st.builds(
    lambda c, d, m, b, frac: LinkParams(c, d, m, b, b * frac),
    st.floats(1e6, 1e12),
    st.floats(0.0, 1e-3),
    st.sampled_from([1500.0 * 8, 8192.0, 9000.0 * 8]),
    st.floats(10.0, 1000.0),
    st.floats(0.01, 0.99),
)
senders = st.builds(SenderParams, st.floats(1e-4, 0.999), st.floats(0.05, 8.0))
states = st.builds(MapState, st.floats(1e-3, 2000.0), st.floats(0.0, 1.0))


@given(states, links, senders)
def test_one_step_invariants(state, lk, sd):
    nxt, rec = step(state, lk, sd)
    assert 0.0 <= nxt.alpha <= 1.0
    assert 0.0 <= rec.queue <= lk.buffer
    assert rec.marked == (rec.queue > lk.threshold)
    assert rec.rtt >= lk.prop_delay
    if rec.marked:
        assert nxt.window >= state.window / 2
    else:
        assert nxt.window == state.window + 1.0


@given(st.floats(0.0, 1.0), st.floats(1e-4, 0.999), st.lists(st.booleans(), min_size=1, max_size=200))
def test_alpha_contained_for_any_mark_sequence(a, g, marks):
    for m in marks:
        a = (1 - g) * a + g if m else (1 - g) * a
        assert 0.0 <= a <= 1.0


@given(st.floats(1e-3, 2000.0), links)
def test_border_equivalence(w, lk):
    # Away from the last few ulps around K*, where W - bdp > K and
    # W > K + bdp may round differently.
    assume(abs(w - border(lk)) > 8 * math.ulp(max(w, border(lk))))
    assert mark(queue_next(w, lk), lk) == (w > border(lk))


@given(st.floats(0.01, 0.99), st.floats(0.05, 8.0), st.floats(0.05, 8.0))
def test_cut_factor_increases_with_gamma(a, g1, g2):
    assume(abs(g1 - g2) > 1e-3)
    lo, hi = sorted((g1, g2))
    assert (1 - a**lo / 2) < (1 - a**hi / 2)


def test_gamma_one_matches_plain_dctcp_for_a_million_steps():
    lk = link(d=30e-6, k=15.0)
    sd = SenderParams(1 / 16, 1.0)
    bdp = lk.capacity * lk.prop_delay / lk.packet_size
    w, a = 1.0, 0.0
    state = MapState(w, a)
    for _ in range(10**6):
        state, _ = step(state, lk, sd)
        q = min(max(w - bdp, 0.0), lk.buffer)
        if q > lk.threshold:
            w, a = (1 - a / 2) * w, (1 - 1 / 16) * a + 1 / 16
        else:
            w, a = w + 1, (1 - 1 / 16) * a
        if state.window != w or state.alpha != a:
            pytest.fail(f"diverged: {state} vs {(w, a)}")


def test_batch_matches_scalar_bitwise():
    rng = random.Random(7)
    cases = []
    for _ in range(40):
        b = rng.uniform(20, 400)
        lk = LinkParams(rng.uniform(1e8, 1e11), rng.uniform(0, 1e-4), 8192.0, b, rng.uniform(0.05, 0.95) * b)
        sd = SenderParams(rng.uniform(0.001, 0.5), rng.choice([1.0, 0.5, 2.0, rng.uniform(0.1, 5)]))
        init = MapState(rng.uniform(0.5, 100), rng.random())
        cases.append((lk, sd, init))
    batch = iterate_batch(
        [c[2].window for c in cases],
        [c[2].alpha for c in cases],
        capacity=[c[0].capacity for c in cases],
        prop_delay=[c[0].prop_delay for c in cases],
        packet_size=[c[0].packet_size for c in cases],
        buffer=[c[0].buffer for c in cases],
        threshold=[c[0].threshold for c in cases],
        g=[c[1].g for c in cases],
        gamma=[c[1].gamma for c in cases],
        transient=300,
        samples=200,
    )
    for j, (lk, sd, init) in enumerate(cases):
        recs = orbit(init, lk, sd, 300, 200)
        assert np.array_equal(batch.window[:, j], [r.window for r in recs])
        assert np.array_equal(batch.alpha[:, j], [r.alpha for r in recs])
        assert np.array_equal(batch.queue[:, j], [r.queue for r in recs])
        assert np.array_equal(batch.marked[:, j], [r.marked for r in recs])


@settings(max_examples=25)
@given(states, links, senders)
def test_step_is_pure(state, lk, sd):
    assert step(state, lk, sd) == step(state, lk, sd)
