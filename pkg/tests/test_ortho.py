"""Orthomorphisms, complete mappings and SCMs: greedy builders, finite
constructions, the existence criterion against exhaustive search, Knut Vic
squares and orthogonality of the tables built from a mapping.
"""

from math import gcd

import pytest

from latininf.errors import (
    BadOrder, BadTransversal, BlockTooLarge, CapExceeded, EmptyParts, MappingClash,
    NotSquareful, UnassignedIndex, UnsupportedGroup, VerifyFailed,
)
from latininf.groups import CyclicGroup, finite_abelian, parse_group
from latininf.index import parse_index
from latininf.services.ortho_service import (
    ORTHOMORPHISM, STRONG, OrthomorphismFamily, PartialMapping, SCMCertificate,
    brute_force_scm_search, build_moo_family, build_scm_greedy, canonical_transversal,
    cayley_table_window, check_mapping, field_multiplier_mapping, knut_vic,
    l_theta_window, normal_mult_window, scm_cyclic, scm_direct_product, scm_direct_sum,
    scm_elementary_2group, scm_exists_finite_abelian, scm_quotient, scm_quotient_cyclic,
    theta_from_R_terrace, verify_complete_mapping, verify_mutually_orthogonal,
    verify_orthomorphism, verify_scm,
)
from latininf.services.scheduler_service import run
from latininf.services.square_service import verify_knutvic, verify_latin, verify_orthogonal
from latininf.services.terrace_service import PartialTerrace, requirement_stream

Z = parse_group("Z")


class TestPartialMapping:
    def test_clash_on_repeated_eta(self):
        m = PartialMapping(Z).assign(0, 1)
        # eta(0) = 1 = eta(2)
        with pytest.raises(MappingClash, match="eta"):
            m.assign(2, 3)

    def test_clash_on_repeated_zeta(self):
        m = PartialMapping(Z).assign(0, 1)
        with pytest.raises(MappingClash, match="zeta"):
            m.assign(2, -1)

    def test_orthomorphism_tracks_only_eta(self):
        m = PartialMapping(Z, ORTHOMORPHISM).assign(0, 1)
        m.assign(2, -1)
        assert check_mapping(m).passed

    def test_identity_is_not_an_orthomorphism(self):
        m = PartialMapping.from_function(CyclicGroup(5), lambda x: x)
        assert not verify_orthomorphism(m).passed
        assert verify_complete_mapping(m).passed

    def test_dict_round_trip(self):
        m = PartialMapping(Z).assign(0, 1).assign(1, 5)
        again = PartialMapping.from_dict(m.to_dict())
        assert again.theta == m.theta
        assert again.tracks == STRONG

    def test_domain_in_enumeration_order(self):
        m = PartialMapping(Z).assign(-1, 4).assign(1, 9).assign(0, 20)
        assert m.domain() == [0, 1, -1]


class TestGreedySCM:
    def test_zero_steps(self):
        m, log = build_scm_greedy(Z, 0)
        assert m.size() == 0

    def test_integers(self):
        m, log = build_scm_greedy(Z, 400)
        assert m.check().passed
        assert verify_scm(m).passed
        assert log.max_growth <= 1
        for k in range(40):
            g = Z.enumerate(k)
            assert g in m.theta
            assert g in m.ran_theta
            assert g in m.ran["eta"]
            assert g in m.ran["zeta"]

    def test_rationals(self):
        m, _ = build_scm_greedy(parse_group("Q"), 200)
        assert m.check().passed

    def test_all_involution_group_refused(self):
        with pytest.raises(NotSquareful):
            build_scm_greedy(parse_group("E2"), 10)

    def test_finite_group_refused(self):
        with pytest.raises(UnsupportedGroup):
            build_scm_greedy(CyclicGroup(7), 10)

    def test_knut_vic_window_is_diagonal_safe(self):
        m, _ = build_scm_greedy(Z, 200)
        points = m.domain()[:25]
        region = l_theta_window(m, rows=points, cols=points)
        assert verify_knutvic(region, Z).passed


class TestCyclicSCM:
    @pytest.mark.parametrize("n", [1, 5, 7, 11, 25])
    def test_certified(self, n):
        cert = scm_cyclic(n)
        assert isinstance(cert, SCMCertificate)
        assert cert.transcript.passed
        assert cert.transcript.statistics["exhaustive"]
        assert cert(1 % n) == 2 % n

    @pytest.mark.parametrize("n", [2, 3, 4, 6, 9])
    def test_bad_order(self, n):
        with pytest.raises(BadOrder):
            scm_cyclic(n)

    def test_z2_has_no_scm(self):
        assert brute_force_scm_search(CyclicGroup(2)) is None


GROUPS_UP_TO_9 = [[2], [3], [4], [5], [6], [7], [8], [9], [2, 2], [2, 4], [2, 2, 2], [3, 3]]


class TestCriterion:
    @pytest.mark.parametrize("factors,expected", [
        ([9], False), ([3, 3], True), ([5], True), ([2], False), ([2, 2], True), ([4, 3], False),
    ])
    def test_known_cases(self, factors, expected):
        assert scm_exists_finite_abelian(factors) is expected

    @pytest.mark.parametrize("factors", GROUPS_UP_TO_9, ids=lambda f: "x".join(map(str, f)))
    def test_agrees_with_exhaustive_search(self, factors):
        group = finite_abelian(factors)
        found = brute_force_scm_search(group)
        assert (found is not None) == scm_exists_finite_abelian(factors)
        if found is not None:
            assert verify_scm(found).passed
            assert found.is_total

    def test_parallel_search_finds_the_same_mapping(self):
        group = finite_abelian([3, 3])
        assert brute_force_scm_search(group, jobs=3).theta == brute_force_scm_search(group).theta

    def test_cap(self):
        with pytest.raises(CapExceeded):
            brute_force_scm_search(CyclicGroup(11))

    def test_bad_factor(self):
        with pytest.raises(ValueError):
            scm_exists_finite_abelian([0])


class TestCompositions:
    def test_direct_product_over_35(self):
        cert = scm_direct_product([scm_cyclic(5), scm_cyclic(7)])
        assert cert.group.descriptor == "prod(Zn:5,Zn:7)"
        assert cert.transcript.passed
        assert cert.transcript.statistics["domain"] == 35

    def test_single_part_product_is_the_part(self):
        part = scm_cyclic(7)
        assert scm_direct_product([part]).mapping.theta == part.mapping.theta

    def test_sum_fixes_identity(self):
        cert = scm_direct_sum([scm_elementary_2group(1), scm_elementary_2group(1, a=3)])
        assert cert((0, 0)) == (0, 0)
        assert cert.transcript.passed

    def test_sum_of_partial_mappings_stays_partial(self):
        m, _ = build_scm_greedy(Z, 12)
        composite = scm_direct_sum([m, scm_cyclic(5)])
        assert isinstance(composite, PartialMapping)
        assert verify_scm(composite).passed

    def test_empty(self):
        with pytest.raises(EmptyParts):
            scm_direct_product([])

    def test_quotient_over_35(self):
        cert = scm_quotient_cyclic(5, 7)
        assert cert.group.order == 35
        assert cert.transcript.passed

    def test_trivial_subgroup_gives_phi(self):
        g = CyclicGroup(7)
        cert = scm_quotient(g, [0], {0: 0}, {r: 2 * r % 7 for r in range(7)})
        assert cert.mapping.theta == scm_cyclic(7).mapping.theta

    def test_bad_transversal(self):
        g = CyclicGroup(35)
        h = [7 * x for x in range(5)]
        theta_h = {7 * x: 14 * x % 35 for x in range(5)}
        phi = {r: 2 * r % 7 for r in range(7)}
        with pytest.raises(BadTransversal):
            scm_quotient(g, h, theta_h, phi, reps=[0, 7, 2, 3, 4, 5, 6])

    def test_phi_must_cover_representatives(self):
        g = CyclicGroup(35)
        h = [7 * x for x in range(5)]
        theta_h = {7 * x: 14 * x % 35 for x in range(5)}
        with pytest.raises(UnassignedIndex):
            scm_quotient(g, h, theta_h, {0: 0})

    def test_canonical_transversal(self):
        assert canonical_transversal(CyclicGroup(35), {7 * x for x in range(5)}) == list(range(7))


class TestFieldBlock:
    @pytest.mark.parametrize("m,order", [(1, 4), (2, 16)])
    def test_exhaustive(self, m, order):
        cert = scm_elementary_2group(m)
        assert cert.group.order == order
        assert cert.transcript.passed
        assert cert.transcript.statistics["field_axioms"] == "exhaustive"

    def test_multiplier_one_fails(self):
        assert not verify_scm(field_multiplier_mapping(1, 1)).passed
        with pytest.raises(VerifyFailed):
            scm_elementary_2group(1, a=1)

    def test_order_bounds(self):
        with pytest.raises(BadOrder):
            scm_elementary_2group(0)
        with pytest.raises(BlockTooLarge):
            scm_elementary_2group(5)


class TestKnutVic:
    @pytest.mark.parametrize("n", [n for n in range(1, 50) if gcd(n, 6) == 1])
    def test_passes_when_coprime_to_six(self, n):
        region = knut_vic(scm_cyclic(n))
        assert len(region) == n * n
        assert verify_knutvic(region, CyclicGroup(n), full=True).passed

    @pytest.mark.parametrize("n", [2, 3, 4, 6, 8, 9])
    def test_doubling_fails_otherwise(self, n):
        mapping = PartialMapping.from_function(CyclicGroup(n), lambda x: 2 * x % n)
        assert not verify_knutvic(knut_vic(mapping), CyclicGroup(n), full=True).passed

    def test_infinite_window_needs_rows(self):
        m, _ = build_scm_greedy(Z, 20)
        region = knut_vic(m)
        assert set(region.rows()) == set(m.domain())

    def test_unassigned_column(self):
        m = PartialMapping(Z).assign(0, 1)
        with pytest.raises(UnassignedIndex):
            l_theta_window(m, cols=[0, 1])


class TestOrthogonalTables:
    def test_l_theta_against_cayley_and_normal(self):
        g = CyclicGroup(7)
        l_theta = knut_vic(scm_cyclic(7))
        assert verify_latin(l_theta).passed
        assert verify_orthogonal(l_theta, cayley_table_window(g)).passed
        assert verify_orthogonal(l_theta, normal_mult_window(g)).passed

    def test_identity_mapping_is_the_cayley_table(self):
        g = CyclicGroup(7)
        identity = PartialMapping.from_function(g, lambda x: x)
        assert not verify_orthogonal(knut_vic(identity), cayley_table_window(g)).passed

    def test_trivial_group(self):
        g = CyclicGroup(1)
        assert verify_orthogonal(knut_vic(scm_cyclic(1)), cayley_table_window(g)).passed


class TestMOO:
    def test_single_mapping_is_a_partial_orthomorphism(self):
        family, _ = build_moo_family(Z, 1, 100)
        assert family.check().passed
        assert verify_orthomorphism(family.mapping(0)).passed

    def test_five_mappings(self):
        family, log = build_moo_family(Z, 5, 300)
        assert family.check().passed
        assert log.max_growth <= 2
        mappings = [family.mapping(i) for i in range(5)]
        assert verify_mutually_orthogonal(mappings).passed
        for a in range(5):
            for b in range(a + 1, 5):
                shared = [g for g in mappings[a].domain() if g in mappings[b].theta][:15]
                ra = l_theta_window(mappings[a], rows=shared, cols=shared)
                rb = l_theta_window(mappings[b], rows=shared, cols=shared)
                assert verify_orthogonal(ra, rb).passed

    def test_pair_clash_refused(self):
        family = OrthomorphismFamily(Z, 2)
        family.assign(0, 0, 1).assign(1, 0, 2)
        family.assign(0, 1, 3)
        with pytest.raises(MappingClash, match="eta_01"):
            family.assign(1, 1, 4)

    def test_resume_size_mismatch(self):
        family = OrthomorphismFamily(Z, 2)
        with pytest.raises(ValueError, match="k=2"):
            build_moo_family(Z, 3, 1, state=family)

    def test_dict_round_trip(self):
        family, _ = build_moo_family(Z, 3, 60)
        again = OrthomorphismFamily.from_dict(family.to_dict())
        assert again.thetas == family.thetas


class TestFromRTerrace:
    def test_distances_give_mutually_orthogonal_orthomorphisms(self):
        t = PartialTerrace(Z, parse_index("Z"), "R")
        run(t, requirement_stream(t), 300)
        thetas = [theta_from_R_terrace(t, d) for d in (1, 2, 3)]
        for m in thetas:
            assert m(0) == 0
            assert verify_orthomorphism(m).passed
        assert verify_mutually_orthogonal(thetas).passed

    def test_empty_terrace_fixes_identity_only(self):
        t = PartialTerrace(Z, parse_index("Z"), "R")
        assert theta_from_R_terrace(t, 1).theta == {0: 0}

    def test_needs_kind_r(self):
        t = PartialTerrace(Z, parse_index("Z"), "T")
        with pytest.raises(ValueError, match="kind R"):
            theta_from_R_terrace(t, 1)
