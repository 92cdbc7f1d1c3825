import csv
import math

import mpmath as mp
import numpy as np
import pytest

from hypwalk import _rng
from hypwalk import freewalk as fwk
from hypwalk import fuchswalk as fw
from hypwalk import hyperbolic as hyp
from hypwalk import polygon as pg
from hypwalk.exceptions import InsufficientSample, SymbolMismatch

OCTAGON_LENGTH = float(2 * mp.acosh(1 + mp.sqrt(2)))


@pytest.fixture(scope="module")
def gens(octagon):
    return pg.side_pairings(octagon)


@pytest.fixture(scope="module")
def uniform8():
    return fwk.StepDistribution.uniform("free", 8)


def single(m, i=0):
    p = np.zeros(2 * m)
    p[i] = 1.0
    return fwk.StepDistribution("free", p)


def reference_distances(gens, mu, n, N, seed):
    """Replay each path's draws and multiply the matrices in extended precision.

    Entries grow like exp(n l / 2), so the working precision grows with n to
    keep the determinant free of cancellation.
    """
    with mp.workdps(30 + 2 * n):
        return _reference_distances(gens, mu, n, N, seed)


def _reference_distances(gens, mu, n, N, seed):
    cum = _rng.cumulative(mu.probs)
    mats = [(mp.matrix([[mp.mpc(g.a), mp.mpc(g.b)], [mp.conj(mp.mpc(g.b)), mp.conj(mp.mpc(g.a))]]), g.reverses)
            for g in gens]
    out = []
    for j in range(N):
        u = _rng.path_uniforms(seed, j, n)
        M, rev = mp.eye(2), False
        for t in range(n):
            G, grev = mats[_rng.pick(cum, u[t])]
            if rev:
                G = G.apply(mp.conj)
            M, rev = M * G, rev != grev
        det = abs(M[0, 0]) ** 2 - abs(M[0, 1]) ** 2
        out.append(float(2 * mp.asinh(abs(M[0, 1]) / mp.sqrt(det))))
    return np.array(out)


# -- simulation ---------------------------------------------------------------

def test_deterministic_walk_moves_along_axis(gens):
    sample = fw.simulate(gens, single(4), 10, 50, seed=1)
    assert np.allclose(sample.distances, 10 * OCTAGON_LENGTH, atol=1e-9)
    assert np.allclose(sample.distances, 30.571418, atol=1e-6)
    angles = np.where(sample.angles > math.pi, sample.angles - 2 * math.pi, sample.angles)
    assert np.abs(angles).max() < 1e-9


def test_simulation_matches_high_precision_products(gens, uniform8):
    sample = fw.simulate(gens, uniform8, 25, 40, seed=13)
    ref = reference_distances(gens, uniform8, 25, 40, 13)
    assert np.allclose(sample.distances, ref, rtol=1e-9, atol=1e-9)


def test_reflection_walk_matches_high_precision_products():
    from hypwalk import coxeter as cx

    cp = cx.CoxeterPolygon.build([2, 3, 2, 4])
    refl = cx.reflections(cp).reflections
    mu = fwk.StepDistribution.uniform("involutive", 8)
    sample = fw.simulate(refl, mu, 20, 30, seed=4)
    ref = reference_distances(refl, mu, 20, 30, 4)
    assert np.allclose(sample.distances, ref, rtol=1e-8, atol=1e-8)


def test_same_seed_bit_identical(gens, uniform8):
    a = fw.simulate(gens, uniform8, 200, 500, seed=42, workers=1)
    b = fw.simulate(gens, uniform8, 200, 500, seed=42, workers=1)
    c = fw.simulate(gens, uniform8, 200, 500, seed=42, workers=8)
    assert a.same_as(b) and a.same_as(c)
    d = fw.simulate(gens, uniform8, 200, 500, seed=43, workers=1)
    assert not np.array_equal(a.u, d.u)


def test_empty_sample(gens, uniform8):
    s = fw.simulate(gens, uniform8, 10, 0, seed=0)
    assert s.N == 0 and s.distances.size == 0


def test_long_walk_stays_finite(gens, uniform8):
    s = fw.simulate(gens, uniform8, 2000, 20, seed=5)
    assert np.all(np.isfinite(s.distances))
    assert np.all(np.abs(np.abs(s.ea) - 1) < 1e-12)


def test_terminal_isometry(gens, uniform8):
    s = fw.simulate(gens, uniform8, 5, 3, seed=2)
    for i in range(3):
        f = s.terminal(i)
        assert f.determinant == pytest.approx(1.0, abs=1e-9)
        assert abs(f(0j) - s.points[i]) < 1e-12


def test_symbol_checks(gens, uniform8):
    with pytest.raises(SymbolMismatch):
        fw.simulate(gens[:6], uniform8, 5, 5, seed=0)
    swapped = gens[4:] + gens[:4]
    with pytest.raises(SymbolMismatch):
        fw.simulate(swapped[:1] + gens[1:], uniform8, 5, 5, seed=0)


# -- drift --------------------------------------------------------------------

def test_deterministic_drift(gens):
    d = fw.estimate_drift(fw.simulate(gens, single(4), 10, 50, seed=1))
    assert d.ell_hat == pytest.approx(OCTAGON_LENGTH, abs=1e-9)
    assert d.ci_width == 0.0


def test_axis_walk_drift_decays(gens):
    p = np.zeros(8)
    p[0] = p[4] = 0.5
    mu = fwk.StepDistribution("free", p)
    drifts = [fw.estimate_drift(fw.simulate(gens, mu, n, 2000, seed=3)).ell_hat for n in (50, 200, 800)]
    assert drifts[0] > drifts[1] > drifts[2]
    # |S_n| for a simple walk has mean sqrt(2 n / pi)
    for n, d in zip((50, 200, 800), drifts):
        assert d == pytest.approx(OCTAGON_LENGTH * math.sqrt(2 / (math.pi * n)), rel=0.1)


def test_uniform_octagon_drift(gens, uniform8):
    d = fw.estimate_drift(fw.simulate(gens, uniform8, 200, 1000, seed=8))
    assert 0 < d.ell_hat <= OCTAGON_LENGTH
    assert d.ci_low < d.ell_hat < d.ci_high


def test_drift_needs_two_paths(gens, uniform8):
    with pytest.raises(InsufficientSample):
        fw.estimate_drift(fw.simulate(gens, uniform8, 10, 1, seed=0))


# -- entropy ------------------------------------------------------------------

def test_entropy_bounds_uniform_octagon(gens, uniform8):
    bounds = fw.entropy_upper_bounds(uniform8, gens, 2)
    assert bounds[0] == pytest.approx(math.log(8), abs=1e-12)
    # g g^-1 gives the identity eight times; the other 56 products are distinct
    h2 = -(mp.mpf(1) / 8 * mp.log(mp.mpf(1) / 8) + mp.mpf(56) / 64 * mp.log(mp.mpf(1) / 64))
    assert bounds[1] == pytest.approx(float(h2 / 2), abs=1e-12)
    assert (bounds[0], bounds[1]) == (pytest.approx(2.0794415, abs=1e-7), pytest.approx(1.9494764, abs=1e-7))


def test_convolution_square_support(gens, uniform8):
    law = fw.convolution_power(uniform8, gens, 2)
    assert len(law) == 57
    ident = law[hyp.Isometry.identity().key(fw.KEY_DECIMALS)][0]
    assert ident == pytest.approx(1 / 8, abs=1e-15)
    assert sum(p for p, _ in law.values()) == pytest.approx(1.0, abs=1e-14)


def test_convolution_independent_of_workers(gens, uniform8):
    a = fw.convolution_power(uniform8, gens, 3, workers=1)
    b = fw.convolution_power(uniform8, gens, 3, workers=4)
    assert list(a) == list(b)
    assert [v[0] for v in a.values()] == [v[0] for v in b.values()]


def test_deterministic_entropy_is_zero(gens):
    assert fw.entropy_upper_bounds(single(4), gens, 3) == [0.0, 0.0, 0.0]


# -- histogram ----------------------------------------------------------------

def test_histogram_deterministic_walk(gens):
    h = fw.boundary_histogram(fw.simulate(gens, single(4), 10, 100, seed=1), 16)
    # the attracting fixed point of g_1 sits at angle 0; rounding may put it just below 2 pi
    assert h.counts[0] + h.counts[-1] == 100
    assert h.frequencies.sum() == pytest.approx(1.0, abs=1e-15)
    assert h.radial_fraction == 1.0 and h.warning == ""


def test_histogram_symmetric_measure(gens, uniform8):
    h = fw.boundary_histogram(fw.simulate(gens, uniform8, 100, 20_000, seed=21), 16)
    assert h.frequencies.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.abs(h.rotation_z_scores()).max() < 4.0


def test_histogram_warns_on_short_walks(gens, uniform8):
    h = fw.boundary_histogram(fw.simulate(gens, uniform8, 1, 200, seed=2), 8)
    assert h.warning


def test_histogram_csv(tmp_path, gens, uniform8):
    h = fw.boundary_histogram(fw.simulate(gens, uniform8, 30, 300, seed=2), 8)
    path = tmp_path / "hist.csv"
    h.write_csv(path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["bin_start_rad", "bin_end_rad", "count", "frequency"]
    assert len(rows) == 9
    assert sum(int(r[2]) for r in rows[1:]) == 300
    assert float(rows[-1][1]) == pytest.approx(2 * math.pi, abs=1e-15)
    plot = h.plot_data()
    assert len(plot["x"]) == len(plot["y"]) == 8


# -- dimension report -----------------------------------------------------------

def test_dimension_report_deterministic(octagon):
    rep = fw.dimension_report(octagon, single(4), 10, 20, seed=0)
    assert rep.dimension_bound == 0.0


def test_dimension_report_uniform(octagon, uniform8):
    rep = fw.dimension_report(octagon, uniform8, 200, 500, seed=1)
    assert rep.dimension_bound == pytest.approx(min(rep.entropy_bounds) / rep.drift.ell_hat, rel=1e-15)
    assert rep.entropy_bounds[1] == pytest.approx(1.9494764, abs=1e-7)
    doc = rep.to_dict()
    assert doc["verdict"] == "singular" and "drift" in doc


def test_dimension_report_symbol_mismatch(octagon):
    with pytest.raises(SymbolMismatch):
        fw.dimension_report(octagon, fwk.StepDistribution.uniform("free", 6), 10, 10, seed=0)
