"""Edge weighting, MWPM decoding, and adjudication."""

import math

import numpy as np
import pytest

from surfgkp.blossom import brute_force_min_perfect, min_weight_perfect_matching
from surfgkp.channel import MarginalCache
from surfgkp.circuit import FrameSimulator, marginal_pe
from surfgkp.decoder import Decoder, adjudicate, assign_weights, extract_events
from surfgkp.gkp import GkpParams, shot_rng
from surfgkp.graphs import DecodingGraph, cached_graphs, _iter_faults
from surfgkp.lattice import build_lattice


@pytest.fixture(scope="module")
def setup3(tmp_path_factory):
    lat = build_lattice(3)
    sim = FrameSimulator(lat, 3)
    gz, gx = cached_graphs(3, 3, 3)
    cache = MarginalCache(tmp_path_factory.mktemp("cache") / "m.json")
    pe = marginal_pe(lat, GkpParams(11.0, 1.0), 3, cache)
    return lat, sim, gz, gx, pe


def test_weight_formula_single_and_masked_sources(setup3):
    """w = ln 2 for a lone p = 1/2 source; a zero source is inert."""
    _, _, gz, _, _ = setup3
    pe = np.zeros(gz.src_idx.max() + 1)
    # find an edge with exactly one location and one with two locations
    one_loc = next(e for e in range(gz.n_edges) if gz.loc_ptr[e + 1] - gz.loc_ptr[e] == 1)
    two_loc = next(e for e in range(gz.n_edges) if gz.loc_ptr[e + 1] - gz.loc_ptr[e] >= 2)
    locs = gz.edge_location_sources(one_loc)
    pe[locs[0][0]] = 0.5
    w = assign_weights(gz, pe)
    assert w[one_loc] == pytest.approx(math.log(2), rel=1e-9)
    pe[:] = 0
    locs = gz.edge_location_sources(two_loc)
    pe[locs[0][0]] = 0.25  # second location left at (clamped) zero
    w = assign_weights(gz, pe)
    assert w[two_loc] == pytest.approx(-math.log(0.25), rel=1e-6)


def test_weights_nonnegative_and_batched(setup3):
    _, _, gz, _, pe = setup3
    w = assign_weights(gz, pe)
    assert np.all(w >= 0) and np.all(np.isfinite(w))
    batch = np.stack([pe, pe * 0.5])
    wb = assign_weights(gz, batch)
    assert wb.shape == (2, gz.n_edges)
    np.testing.assert_allclose(wb[0], w, rtol=1e-12)


def test_extract_events():
    syn = np.zeros((4, 3), dtype=np.uint8)
    assert not extract_events(syn).any()
    syn[1, 2] = 1  # flip appears in layer 1 and persists
    syn[2, 2] = 1
    syn[3, 2] = 1
    ev = extract_events(syn)
    assert list(np.flatnonzero(ev[:, 2])) == [1]
    syn2 = np.zeros((4, 3), dtype=np.uint8)
    syn2[1, 0] = 1  # one-round blip: measurement-flip signature
    ev2 = extract_events(syn2)
    assert list(np.flatnonzero(ev2[:, 0])) == [1, 2]


def test_empty_events_and_direct_edge(setup3):
    lat, sim, gz, _, pe = setup3
    dec = Decoder(gz)
    w = assign_weights(gz, pe)
    corr, pairs = dec.decode(w, np.array([], dtype=int))
    assert not corr.any() and pairs == []
    # idle Z on the center qubit: two adjacent events, direct edge cheapest
    res = sim.inject_fault(("idle", 1, 4, "Z"))
    layers, stabs = np.nonzero(res.events[0][:, : lat.m1])
    events = stabs * 4 + layers
    corr, pairs = dec.decode(w, events)
    assert list(np.flatnonzero(corr)) == [4]
    assert pairs == [(int(events[0]), int(events[1]))]


def test_matching_exactness_against_enumeration(setup3):
    """Condensed event matching equals brute-force enumeration (<=12 events)."""
    _, _, gz, _, _ = setup3
    dec = Decoder(gz)
    rng = np.random.default_rng(4)
    from scipy.sparse.csgraph import dijkstra

    for rep in range(60):
        w = rng.uniform(0.2, 8.0, size=gz.n_edges)
        k = int(rng.integers(1, 13))
        events = rng.choice(gz.n_stabs * (gz.t + 1), size=k, replace=False)
        dec._refresh(w)
        dist = dijkstra(dec._sp.matrix, directed=True, indices=events)
        D = dist[:, events]
        bd = dist[:, gz.virtual_vertex]
        if k % 2:
            D = np.pad(D, ((0, 1), (0, 1)))
            D[-1, :-1] = bd
            D[:-1, -1] = bd
        mate = min_weight_perfect_matching(D)
        total = sum(D[i, mate[i]] for i in range(len(mate)) if mate[i] > i)
        assert total == pytest.approx(brute_force_min_perfect(D), rel=1e-9)


def test_adjudicate_examples():
    lat = build_lattice(3)
    zero = np.zeros(lat.n, dtype=np.uint8)
    assert adjudicate(zero, zero, zero, zero, lat) == (False, False)
    # residual equal to a full logical-Z row: logical Z failure
    zrow = zero.copy()
    zrow[lat.z_logical_support()] = 1
    assert adjudicate(zero, zrow, zero, zero, lat) == (False, True)
    # residual equal to a full logical-X column: logical X failure
    xcol = zero.copy()
    xcol[lat.x_logical_support()] = 1
    assert adjudicate(xcol, zero, zero, zero, lat) == (True, False)
    # stabilizers act trivially
    for st in lat.z_stabs:
        v = zero.copy()
        v[list(st.support)] = 1
        assert adjudicate(zero, v, zero, zero, lat) == (False, False)
    for st in lat.x_stabs:
        v = zero.copy()
        v[list(st.support)] = 1
        assert adjudicate(v, zero, zero, zero, lat) == (False, False)


def test_single_fault_exhaustive_no_analog(setup3):
    """Distance-3 corrects every single fault with marginal weights."""
    lat, sim, gz, gx, pe = setup3
    dec_z, dec_x = Decoder(gz), Decoder(gx)
    wz, wx = assign_weights(gz, pe), assign_weights(gx, pe)
    dzt, pzt = dec_z.all_pairs(wz)
    dxt, pxt = dec_x.all_pairs(wx)
    m1, t = lat.m1, 3
    n_checked = 0
    for fault, _loc, _idx in _iter_faults(lat, sim.layout, t):
        res = sim.inject_fault(fault)
        layers, stabs = np.nonzero(res.events[0])
        isz = stabs < m1
        evz = stabs[isz] * (t + 1) + layers[isz]
        evx = (stabs[~isz] - m1) * (t + 1) + layers[~isz]
        corr_z, _ = dec_z.decode_static(wz, dzt, pzt, evz)
        corr_x, _ = dec_x.decode_static(wx, dxt, pxt, evx)
        fx, fz = adjudicate(res.xf[0], res.zf[0], corr_x, corr_z, lat)
        assert not fx and not fz, f"single fault {fault} caused a logical error"
        n_checked += 1
    assert n_checked == 3 * (9 * 3 + 8 * 2 + 24 * 15)


def test_decode_order_independence(setup3):
    """Decoding depends on (graph, weights, events), not edge order."""
    lat, sim, gz, _, pe = setup3
    rng = np.random.default_rng(9)
    perm = rng.permutation(gz.n_edges)
    # permute the ragged location structure consistently
    loc_sizes = np.diff(gz.loc_ptr)
    locs = [gz.edge_location_sources(e) for e in range(gz.n_edges)]
    new_loc_ptr = [0]
    new_src_ptr = [0]
    new_src = []
    for e in perm:
        for loc in locs[e]:
            new_src.extend(loc)
            new_src_ptr.append(len(new_src))
        new_loc_ptr.append(len(new_src_ptr) - 1)
    g2 = DecodingGraph(
        error_type=gz.error_type,
        n_stabs=gz.n_stabs,
        t=gz.t,
        n_data=gz.n_data,
        eu=gz.eu[perm],
        ev=gz.ev[perm],
        kind=[gz.kind[e] for e in perm],
        residual=gz.residual[perm],
        loc_ptr=np.asarray(new_loc_ptr),
        src_ptr=np.asarray(new_src_ptr),
        src_idx=np.asarray(new_src),
    )
    dec1, dec2 = Decoder(gz), Decoder(g2)
    w1 = assign_weights(gz, pe)
    w2 = assign_weights(g2, pe)
    np.testing.assert_allclose(np.sort(w1), np.sort(w2), rtol=1e-12)
    params = GkpParams(10.0, 1.0)
    res = sim.run_batch(params, shot_rng(3, 0, 0), 256, analog=False)
    m1, t = lat.m1, 3
    for s in range(256):
        layers, stabs = np.nonzero(res.events[s][:, :m1])
        ev = stabs * (t + 1) + layers
        c1, _ = dec1.decode(w1, ev)
        c2, _ = dec2.decode(w2, ev)
        np.testing.assert_array_equal(c1, c2)


def test_corrections_cancel_syndrome(setup3):
    """Corrected frames commute with every stabilizer (random shots)."""
    lat, sim, gz, gx, pe = setup3
    dec_z, dec_x = Decoder(gz), Decoder(gx)
    params = GkpParams(9.5, 1.0)
    res = sim.run_batch(params, shot_rng(8, 0, 0), 512, analog=True)
    wz = assign_weights(gz, res.pe)
    wx = assign_weights(gx, res.pe)
    Xmat = lat.support_matrix("x")
    Zmat = lat.support_matrix("z")
    m1, t = lat.m1, 3
    for s in range(512):
        layers, stabs = np.nonzero(res.events[s])
        isz = stabs < m1
        evz = stabs[isz] * (t + 1) + layers[isz]
        evx = (stabs[~isz] - m1) * (t + 1) + layers[~isz]
        corr_z, _ = dec_z.decode(wz[s], evz)
        corr_x, _ = dec_x.decode(wx[s], evx)
        assert not ((Xmat @ (res.zf[s] ^ corr_z)) % 2).any()
        assert not ((Zmat @ (res.xf[s] ^ corr_x)) % 2).any()


def test_false_alarm_constructed_instance(setup3):
    """A single fault plus two hot false-alarm beliefs flips the decoder
    onto a wrong path, producing a logical failure (existence case)."""
    lat, sim, gz, _, pe_marg = setup3
    layout = sim.layout
    dec = Decoder(gz)
    res = sim.inject_fault(("idle", 1, 3, "Z"))  # boundary data qubit
    layers, stabs = np.nonzero(res.events[0][:, : lat.m1])
    events = stabs * 4 + layers
    assert len(events) == 1  # single boundary-adjacent detection event

    # honest weights: the direct boundary edge wins, no failure
    w = assign_weights(gz, pe_marg)
    corr, _ = dec.decode(w, events)
    fx, fz = adjudicate(res.xf[0], res.zf[0], np.zeros(lat.n, np.uint8), corr, lat)
    assert not fz and not fx

    # two correctable-but-near-wall locations elsewhere report hot beliefs
    pe_hot = pe_marg.copy()
    pe_hot[layout.idle_base(1, 4) + 2] = 0.45
    pe_hot[layout.idle_base(1, 5) + 2] = 0.45
    w_hot = assign_weights(gz, pe_hot)
    corr, _ = dec.decode(w_hot, events)
    # the applied path covers data qubits {4, 5} up to stabilizer equivalence
    from surfgkp.lattice import canonicalize, reduce_mod_span

    rref, piv = reduce_mod_span(lat.support_matrix("z"))
    want = np.zeros(lat.n, np.uint8)
    want[[4, 5]] = 1
    np.testing.assert_array_equal(
        canonicalize(corr, rref, piv), canonicalize(want, rref, piv)
    )
    fx, fz = adjudicate(res.xf[0], res.zf[0], np.zeros(lat.n, np.uint8), corr, lat)
    assert fz
