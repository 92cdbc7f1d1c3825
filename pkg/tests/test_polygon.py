import cmath
import math

import mpmath as mp
import numpy as np
import pytest

import oracles
from hypwalk import hyperbolic as hyp
from hypwalk import polygon as pg
from hypwalk.exceptions import (
    DualTrickRequired,
    GeometryError,
    NoIntegerCycle,
    PreconditionAngleSum,
    PreconditionViolated,
    ReconstructionFailed,
    SidesDoNotMeet,
    TargetUnreachable,
)

OCTAGON_APOTHEM = float(mp.acosh(1 + mp.sqrt(2)))
RIGHT_OCTAGON_APOTHEM = float(oracles.regular_apothem(4, mp.pi / 2))
DECAGON_APOTHEM = float(oracles.regular_apothem(5, 2 * mp.pi / 5))


def sampled_polygons(rng, count, ms=(3, 4, 5, 6), ks=(1, 2, 3)):
    out = []
    feasible = [(m, k) for m in ms for k in ks if 2 * math.pi / k < (m - 1) * math.pi]
    while len(out) < count:
        m, k = feasible[rng.integers(len(feasible))]
        out.append(pg.random_polygon(rng, m, k))
    return out


# -- vertex angle ---------------------------------------------------------------

def test_vertex_angle_regular_octagon():
    assert pg.vertex_angle(OCTAGON_APOTHEM, OCTAGON_APOTHEM, math.pi / 4) == pytest.approx(math.pi / 4, abs=1e-12)
    assert pg.vertex_angle(1.5285709, 1.5285709, math.pi / 4) == pytest.approx(0.7853982, abs=1e-6)


def test_vertex_angle_half_half_right():
    ref = mp.acos(mp.sinh(mp.mpf("0.5")) ** 2)
    got = pg.vertex_angle(0.5, 0.5, math.pi / 2)
    assert got == pytest.approx(float(ref), abs=1e-14)
    # arccos(sinh^2 0.5): cosine 0.2715403 as quoted, angle 1.2958032
    assert math.cos(got) == pytest.approx(0.2715403, abs=1e-7)


def test_vertex_angle_sides_do_not_meet():
    c = oracles.vertex_angle_cos(0.2, 0.2, 2.8)
    assert c > 1
    assert float(c) == pytest.approx(1.0209526, abs=1e-7)
    with pytest.raises(SidesDoNotMeet):
        pg.vertex_angle(0.2, 0.2, 2.8)


def test_vertex_angle_cos_matches_hyperboloid(rng):
    for _ in range(200):
        a1, a2 = rng.uniform(0.0, 4.0, 2)
        alpha = rng.uniform(0.01, 3.1)
        ref = float(oracles.vertex_angle_cos(a1, a2, alpha))
        assert pg.vertex_angle_cos(a1, a2, alpha) == pytest.approx(ref, rel=1e-12, abs=1e-12)
        z1, z2 = math.tanh(a1), math.tanh(a2)
        if max(z1, z2) < 0.999:
            assert pg.vertex_angle_cos_z(z1, z2, alpha) == pytest.approx(ref, rel=1e-9, abs=1e-9)


# -- building -----------------------------------------------------------------

def test_build_genus_two_octagon(octagon):
    assert np.allclose(octagon.apothems, OCTAGON_APOTHEM, atol=1e-12)
    assert np.allclose(octagon.apothems, 1.5285709, atol=1e-6)
    assert np.allclose(octagon.gamma, math.pi / 4, atol=1e-12)
    assert octagon.k == 2


def test_build_right_angled_octagon(right_octagon):
    assert np.allclose(right_octagon.apothems, RIGHT_OCTAGON_APOTHEM, atol=1e-12)
    assert np.allclose(right_octagon.apothems, 1.2242262, atol=1e-6)
    assert math.cos(math.pi / 4) / math.sin(math.pi / 8) == pytest.approx(1.8477590, abs=1e-7)
    assert np.allclose(right_octagon.gamma, math.pi / 2, atol=1e-12)


def test_build_unreachable_target():
    with pytest.raises(TargetUnreachable):
        pg.build(pg.PolygonSpec.uniform(3, 1))


def test_check_cycle(octagon, right_octagon):
    assert pg.check_cycle(octagon) == 2
    assert pg.check_cycle(right_octagon) == 1


def test_perturbed_apothem_breaks_cycle():
    w = np.full(4, OCTAGON_APOTHEM)
    w[1] += 0.05
    poly = pg.build(pg.PolygonSpec(4, np.full(4, math.pi / 4), w))
    with pytest.raises(NoIntegerCycle):
        pg.check_cycle(poly)


def test_build_with_angles_reproduces_angles(rng):
    for _ in range(20):
        m = int(rng.integers(3, 7))
        gamma = rng.dirichlet(np.ones(m)) * (2 * math.pi / 2)
        poly = pg.build_with_angles(gamma, np.exp(rng.uniform(-1, 1, m)))
        assert np.abs(poly.gamma - gamma).max() < 1e-9
        assert poly.alpha.sum() == pytest.approx(math.pi, abs=1e-9)


def test_polygon_invariants_on_random_polygons(rng):
    for poly in sampled_polygons(rng, 60):
        m = poly.m
        assert np.abs(poly.vertex_residuals()).max() < 1e-10
        assert poly.alpha.sum() == pytest.approx(math.pi, abs=1e-9)
        assert poly.symmetry_defect() < 1e-10
        assert pg.check_cycle(poly) == poly.k
        # each vertex lies on its two sides, each midpoint on its side
        sides = poly.sides
        for i in range(2 * m):
            assert sides[i].contains(complex(poly.vertices[i - 1]), 1e-8)
            assert sides[i].contains(complex(poly.vertices[i]), 1e-8)
            p, q = complex(poly.vertices[i - 1]), complex(poly.vertices[i])
            assert hyp.dist(complex(poly.midpoints[i]), p) == pytest.approx(
                hyp.dist(complex(poly.midpoints[i]), q), abs=1e-8)


def test_cycle_solve_is_monotone(rng):
    # the angle sum decreases in the scale wherever the sides bound a genuine polygon;
    # beyond that some side no longer contributes and the formula stops applying
    checked = 0
    while checked < 10:
        m = int(rng.integers(3, 7))
        alpha = rng.dirichlet(np.full(m, 4.0)) * math.pi
        alpha[-1] = math.pi - alpha[:-1].sum()
        spec = pg.PolygonSpec(m, alpha, np.exp(rng.uniform(-0.5, 0.5, m)), 1)
        phi = np.concatenate([[0.0], np.cumsum(alpha[:-1])])
        sums = []
        for t in np.linspace(1e-3, pg._scale_limit(spec) * (1 - 1e-9), 40):
            try:
                pg.assemble(phi, t * spec.apothem_weights)
            except GeometryError:
                continue
            sums.append(pg.angle_sum_at_scale(spec, t))
        if len(sums) < 5:
            continue
        checked += 1
        assert all(b < a for a, b in zip(sums, sums[1:]))


def test_serialization_roundtrip(octagon):
    back = pg.SymmetricPolygon.from_dict(octagon.to_dict())
    assert np.array_equal(back.apothems, octagon.apothems)
    assert np.array_equal(back.vertices, octagon.vertices)
    assert back.k == 2


# -- side pairings -------------------------------------------------------------

def test_octagon_pairing_lengths(octagon):
    ref = float(2 * mp.acosh(1 + mp.sqrt(2)))
    lengths = pg.pairing_lengths(octagon)
    assert lengths.shape == (8,)
    assert np.allclose(lengths, ref, atol=1e-12)


def test_pairings_are_inverse(octagon, rng):
    g = pg.side_pairings(octagon)
    for i in range(4):
        assert hyp.compose(g[i], g[i + 4]).is_identity(1e-12)
    for poly in sampled_polygons(rng, 20):
        g = pg.side_pairings(poly)
        m = poly.m
        for i in range(m):
            # rounding in the product grows with the squared matrix entries
            assert hyp.compose(g[i], g[i + m]).is_identity(1e-14 * abs(g[i].a) ** 2 + 1e-12)


def test_pairings_map_opposite_side_onto_side(rng):
    for poly in sampled_polygons(rng, 30):
        g = pg.side_pairings(poly)
        sides = poly.sides
        m = poly.m
        for i in range(m):
            image = sides[i + m].image(g[i])
            ends = sorted(cmath.phase(e) % (2 * math.pi) for e in image.endpoints)
            want = sorted(cmath.phase(e) % (2 * math.pi) for e in sides[i].endpoints)
            assert np.allclose(ends, want, atol=1e-9)


def test_pairing_length_is_twice_midpoint_distance(rng):
    for poly in sampled_polygons(rng, 100):
        lengths = pg.pairing_lengths(poly)[: poly.m]
        ref = [2 * float(oracles.dist(0, complex(q))) for q in poly.midpoints[: poly.m]]
        assert np.allclose(lengths, ref, atol=1e-9)


def test_sigma_regular_octagon(octagon):
    ref = 8 / (1 + mp.exp(2 * mp.acosh(1 + mp.sqrt(2))))
    assert pg.sigma(octagon) == pytest.approx(float(ref), abs=1e-14)


# -- neutralizing pairs ---------------------------------------------------------

def test_acute_polygon_has_no_pairs(octagon, decagon):
    for poly in (octagon, decagon):
        rep = pg.neutralizing_pairs(poly)
        assert rep.obtuse == [] and rep.pairs == [] and rep.disjoint
    assert np.allclose(decagon.gamma, 2 * math.pi / 5)


def test_one_obtuse_angle_gets_one_pair():
    gamma = [2.0, 0.6, 1.2, 1.2, 2 * math.pi - 5.0]
    poly = pg.build_with_angles(gamma, np.ones(5))
    rep = pg.neutralizing_pairs(poly)
    assert rep.obtuse == [0, 5]
    assert rep.pairs == [(0, 1), (5, 6)]
    assert rep.disjoint


def shared_partner_polygon():
    # vertices 0 and 2 can only pair with vertex 1; vertex 3 has no partner
    return pg.build_with_angles([1.8, 0.2, 1.8, 2 * math.pi - 3.8], np.ones(4))


def test_shared_partner_is_not_disjoint():
    rep = pg.neutralizing_pairs(shared_partner_polygon())
    assert not rep.disjoint
    assert rep.unmatched == [3, 7]


# -- pentagon surgery -----------------------------------------------------------

def right_pentagon(b=0.8, opening=2.0):
    """Pentagon with right angles at B, C, D, E, symmetric about its bisector."""
    d = math.atanh(math.cos(0.5 * opening) / math.tanh(b))
    side_b = hyp.Geodesic.from_foot(0.0, b)
    side_e = hyp.Geodesic.from_foot(opening, b)
    side_5 = hyp.Geodesic.from_foot(0.5 * opening, d)
    C = hyp.intersect_angle(side_b, side_5)[0]
    D = hyp.intersect_angle(side_5, side_e)[0]
    B, E = complex(math.tanh(0.5 * b)), math.tanh(0.5 * b) * cmath.exp(1j * opening)
    return 0j, B, C, D, E


def test_surgery_boundary_case():
    A, B, C, D, E = right_pentagon()
    assert hyp.angle_at(C, B, D) == pytest.approx(math.pi / 2, abs=1e-12)
    assert hyp.angle_at(D, C, E) == pytest.approx(math.pi / 2, abs=1e-12)
    cut = pg.pentagon_surgery(A, B, C, D, E)
    assert cut.delta == pytest.approx(math.pi / 2, abs=1e-9)


def test_surgery_on_random_pentagons(rng):
    done = 0
    for _ in range(200):
        A, B, C, D, E = pg.sample_admissible_pentagon(rng)
        try:
            cut = pg.pentagon_surgery(A, B, C, D, E)
        except pg.NoIntersection:
            continue
        done += 1
        assert cut.delta <= math.pi / 2 + 1e-9
        # F on line BC at a right angle to FP, G on line ED
        assert hyp.Geodesic.through(B, C).contains(cut.F)
        assert hyp.Geodesic.through(E, D).contains(cut.G)
        P = hyp.midpoint(C, D)
        assert hyp.angle_at(cut.F, B, P) == pytest.approx(math.pi / 2, abs=1e-9)
    assert done > 100


def test_surgery_rejects_obtuse_c():
    # moving the fifth side of the right-angled pentagon inward makes C and D obtuse
    b, opening = 0.8, 2.0
    side_b = hyp.Geodesic.from_foot(0.0, b)
    side_e = hyp.Geodesic.from_foot(opening, b)
    side_5 = hyp.Geodesic.from_foot(0.5 * opening, 0.9)
    C = hyp.intersect_angle(side_b, side_5)[0]
    D = hyp.intersect_angle(side_5, side_e)[0]
    B, E = complex(math.tanh(0.5 * b)), math.tanh(0.5 * b) * cmath.exp(1j * opening)
    assert hyp.angle_at(C, B, D) > math.pi / 2
    with pytest.raises(PreconditionViolated):
        pg.pentagon_surgery(0j, B, C, D, E)


def test_surgery_rejects_missing_right_angle():
    A, B, C, D, E = right_pentagon()
    with pytest.raises(PreconditionViolated):
        pg.pentagon_surgery(A, 0.9 * B, C, D, E)


# -- reduction to acute --------------------------------------------------------

def test_reduce_acute_polygon_is_noop(octagon):
    assert pg.reduce_to_acute(octagon) is octagon


def test_reduce_one_obtuse_polygon():
    poly = pg.build_with_angles([2.0, 0.6, 1.2, 1.2, 2 * math.pi - 5.0], np.ones(5))
    out = pg.reduce_to_acute(poly)
    assert out.m == poly.m
    assert out.gamma.max() <= math.pi / 2 + 1e-12
    assert out.symmetry_defect() < 1e-10
    assert pg.phi_sum(poly.midpoint_distances) <= pg.phi_sum(out.apothems) + 1e-12


def test_reduce_random_polygons_with_obtuse_angles(rng):
    done = 0
    while done < 15:
        poly = pg.random_polygon(rng, int(rng.integers(4, 7)), 1)
        rep = pg.neutralizing_pairs(poly)
        if not rep.obtuse or not rep.disjoint:
            continue
        try:
            out = pg.reduce_to_acute(poly)
        except pg.NoIntersection:
            continue
        done += 1
        assert out.gamma.max() <= math.pi / 2 + 1e-12
        assert pg.phi_sum(poly.midpoint_distances) <= pg.phi_sum(out.apothems) + 1e-12


def test_reduce_requires_disjoint_pairs():
    with pytest.raises(DualTrickRequired):
        pg.reduce_to_acute(shared_partner_polygon())


# -- dual polygon ---------------------------------------------------------------

def test_dual_of_regular_decagon(decagon):
    d = pg.dual(decagon)
    side = float(2 * oracles.regular_apothem(5, 2 * mp.pi / 5))
    assert d.m == 5
    assert np.allclose(d.side_lengths, side, atol=1e-12)
    assert np.allclose(d.side_lengths, 3.2338434, atol=1e-6)
    assert np.allclose(d.angles, math.pi / 5, atol=1e-10)
    assert d.closure_residual < 1e-8


def test_dual_preserves_sigma(decagon):
    ref = 10 / (1 + mp.exp(2 * oracles.regular_apothem(5, 2 * mp.pi / 5)))
    assert pg.sigma(decagon) == pytest.approx(float(ref), abs=1e-14)
    assert pg.dual_sigma(pg.dual(decagon)) == pytest.approx(float(ref), abs=1e-12)


def test_dual_rejects_wrong_angle_sum(octagon):
    with pytest.raises(PreconditionAngleSum):
        pg.dual(octagon)


def test_dual_closes_on_random_polygons(rng):
    for poly in sampled_polygons(rng, 20, ks=(1,)):
        d = pg.dual(poly)
        assert d.closure_residual < 1e-8
        assert pg.dual_sigma(d) == pytest.approx(pg.sigma(poly), abs=1e-10)
        assert d.angles.sum() == pytest.approx(math.pi, abs=1e-9)


def test_redistribute_at_centre_reproduces_decagon(decagon):
    d = pg.dual(decagon)
    # the glued vertex v of the dual is the image of every p_i; the old centre is
    # the point whose quadrilaterals are the original ones, i.e. the dual's basepoint
    back = pg.redistribute_basepoint(d, d.basepoint)
    assert np.allclose(np.sort(back.apothems), np.sort(decagon.apothems), atol=1e-9)
    assert np.allclose(np.sort(back.gamma), np.sort(decagon.gamma), atol=1e-9)


def test_redistribute_roundtrip_preserves_sigma(rng):
    for poly in sampled_polygons(rng, 10, ms=(4, 5, 6), ks=(1,)):
        d = pg.dual(poly)
        out = pg.redistribute_basepoint(d)
        assert pg.sigma(out) == pytest.approx(pg.dual_sigma(d), abs=1e-10)
        rep = pg.neutralizing_pairs(out)
        assert rep.disjoint and len(rep.obtuse) <= 4


def test_redistribute_needle_fails():
    needle = pg.DualPolygon.from_sides_and_angles([6.0, 0.1, 6.0, 0.1], [0.05, 0.05, 0.05, 0.05])
    with pytest.raises(ReconstructionFailed):
        pg.redistribute_basepoint(needle)
