"""Enumeration correctness against brute-force orbit oracles, plus
realization and alpha-equivalence behavior."""

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spe.combinat import Mode
from spe.enumerator import (
    Assignment,
    InvalidRealization,
    alpha_equivalent,
    canonical_signature,
    enumerate_assignments,
    naive_count,
    naive_enumerate,
    plan,
    programs_alpha_equivalent,
    realize,
    realize_source,
    variant_name,
    variants,
)
from spe.minilang import interpret, parse, render, structurally_equal
from spe.skeleton import Granularity, extract

from conftest import LOOP_SRC, SCOPED_SRC, BRANCH_SRC, random_skeleton
from oracles import burnside_count, orbits, pools_of_program, renaming_group


def stream_vectors(skel, mode=Mode.COMPLETE, granularity=Granularity.INTRA):
    return [a.values for a in enumerate_assignments(skel, mode, granularity)]


def check_orbit_bijection(skel, granularity=Granularity.INTER):
    """Every naive orbit under the compact renaming group contains
    exactly one enumerated vector. True alpha-equivalence respects
    scopes, so this only holds for the whole-program granularity;
    intra merges globals into each function's root pool and may
    conflate orbits by design."""
    group = renaming_group(pools_of_program(skel.program))
    naive = [a.values for a in naive_enumerate(skel, cap=200_000)]
    orbit_map = orbits(naive, group)
    stream = stream_vectors(skel, Mode.COMPLETE, granularity)
    assert len(set(stream)) == len(stream)
    remaining = dict(orbit_map)
    for v in stream:
        hits = [key for key, members in remaining.items() if v in members]
        assert len(hits) == 1, f"vector {v} in {len(hits)} orbits"
        del remaining[hits[0]]
    assert not remaining, f"{len(remaining)} orbits missed"
    return len(orbit_map)


class TestLoop:
    def test_stream_size_and_membership(self, loop_skel):
        vals = stream_vectors(loop_skel)
        assert len(vals) == 32
        assert ("a", "b", "a", "a", "a", "b") in vals
        assert ("a", "b", "b", "b", "a", "b") in vals
        assert ("b", "a", "b", "b", "b", "a") not in vals

    def test_paper_equals_complete_on_flat(self, loop_skel):
        assert stream_vectors(loop_skel, Mode.PAPER) == stream_vectors(loop_skel)

    def test_orbit_bijection(self, loop_skel):
        assert check_orbit_bijection(loop_skel) == 32

    def test_origin_rgs(self, loop_skel):
        sig = canonical_signature(loop_skel, loop_skel.origin_assignment)
        ((unit, type_, config, rgs),) = sig.parts
        assert unit == "main" and type_ == "int"
        assert config == (0, 0, 0, 0, 0, 0)
        assert rgs == ((0, 1, 0, 0, 0, 1),)

    def test_p2_rgs(self, loop_skel):
        sig = canonical_signature(loop_skel, Assignment(("a", "b", "b", "b", "a", "b")))
        assert sig.parts[0][3] == ((0, 1, 1, 1, 0, 1),)

    def test_alpha_equivalence(self, loop_skel):
        origin = Assignment(("a", "b", "a", "a", "a", "b"))
        mirrored = Assignment(("b", "a", "b", "b", "b", "a"))
        other = Assignment(("a", "b", "b", "b", "a", "b"))
        assert alpha_equivalent(loop_skel, origin, mirrored)
        assert not alpha_equivalent(loop_skel, origin, other)
        assert alpha_equivalent(loop_skel, origin, origin)

    def test_realize_mirror_is_p1(self, loop_skel):
        p1 = realize(loop_skel, Assignment(("b", "a", "b", "b", "b", "a")))
        src = render(p1)
        assert "b = 10;" in src
        assert "a = 1;" in src
        assert "while (b)" in src
        assert "b = b - a;" in src

    def test_naive_enumeration(self, loop_skel):
        vals = [a.values for a in naive_enumerate(loop_skel)]
        assert len(vals) == 64 == naive_count(loop_skel)
        assert vals == sorted(vals)
        with pytest.raises(ValueError):
            list(naive_enumerate(loop_skel, cap=63))


class TestBranch:
    def test_paper_within_complete(self, branch_skel):
        paper = set(stream_vectors(branch_skel, Mode.PAPER))
        comp = set(stream_vectors(branch_skel, Mode.COMPLETE))
        assert len(paper) == 36 and len(comp) == 40
        assert paper < comp

    def test_extras_shape(self, branch_skel):
        paper = set(stream_vectors(branch_skel, Mode.PAPER))
        comp = set(stream_vectors(branch_skel, Mode.COMPLETE))
        local_vars = {"c", "d"}
        for v in comp - paper:
            root_values = {v[0], v[1], v[4]}
            assert len(root_values) == 1  # every root hole on one variable
            assert local_vars & {v[2], v[3]}  # and some hole uses the block pool

    def test_orbit_bijection(self, branch_skel):
        assert check_orbit_bijection(branch_skel) == 40

    def test_burnside_agrees(self, branch_skel):
        group = renaming_group(pools_of_program(branch_skel.program))
        var_sets = [h.names for h in branch_skel.holes]
        assert burnside_count(var_sets, group) == 40


class TestScoped:
    def test_inter_complete_matches_oracles(self, scoped_skel):
        group = renaming_group(pools_of_program(scoped_skel.program))
        var_sets = [h.names for h in scoped_skel.holes]
        expected = burnside_count(var_sets, group)
        stream = stream_vectors(scoped_skel, Mode.COMPLETE, Granularity.INTER)
        assert len(stream) == len(set(stream)) == expected == 8448

    def test_inter_paper_subset(self, scoped_skel):
        paper = set(stream_vectors(scoped_skel, Mode.PAPER, Granularity.INTER))
        comp = set(stream_vectors(scoped_skel, Mode.COMPLETE, Granularity.INTER))
        assert len(paper) == 8327
        assert paper < comp

    def test_signatures_all_distinct(self, scoped_skel):
        sigs = {
            canonical_signature(scoped_skel, a, Granularity.INTER)
            for a in enumerate_assignments(scoped_skel, Mode.COMPLETE, Granularity.INTER)
        }
        assert len(sigs) == 8448

    def test_invalid_realizations_marked_not_dropped(self, scoped_skel):
        seen = list(variants(scoped_skel, Mode.COMPLETE, Granularity.INTER, limit=200))
        assert [v.seq for v in seen] == list(range(1, 201))
        bad = [v for v in seen if not v.ok]
        assert bad, "expected some duplicate-declaration assignments"
        assert all(v.error and v.source is None for v in bad)
        assert all(v.ok == (v.program is not None) for v in seen)

    def test_duplicate_decl_raises(self, scoped_skel):
        values = list(scoped_skel.origin_vector)
        values[1] = values[0]  # both globals named alike
        with pytest.raises(InvalidRealization):
            realize(scoped_skel, Assignment(tuple(values)))


class TestProgramEquivalence:
    def test_cross_scope_renaming(self, scoped):
        import re

        swap = {"a": "c", "c": "a"}
        src = re.sub(r"(?<!%)\b[ac]\b", lambda m: swap[m.group(0)], SCOPED_SRC)
        assert programs_alpha_equivalent(scoped, parse(src))

    def test_within_pool_swap(self, scoped):
        import re

        swap = {"a": "b", "b": "a", "c": "d", "d": "c"}
        src = re.sub(r"(?<!%)\b[abcd]\b", lambda m: swap[m.group(0)], SCOPED_SRC)
        assert programs_alpha_equivalent(scoped, parse(src))

    def test_reflexive(self, scoped):
        assert programs_alpha_equivalent(scoped, parse(SCOPED_SRC))

    def test_binding_change_differs(self, scoped):
        assert not programs_alpha_equivalent(
            scoped, parse(SCOPED_SRC.replace("b = c + d", "a = c + d"))
        )
        assert not programs_alpha_equivalent(
            scoped, parse(SCOPED_SRC.replace("c + d", "c + c"))
        )

    def test_shape_change_differs(self, scoped):
        assert not programs_alpha_equivalent(
            scoped, parse(SCOPED_SRC.replace("return 0;", "return 1;"))
        )


class TestRealization:
    def test_origin_round_trip(self, loop, loop_skel):
        p = realize(loop_skel, loop_skel.origin_assignment)
        assert structurally_equal(p, loop)
        assert render(p) == render(loop)

    def test_empty_skeleton_round_trip(self):
        src = "int main(void) { return 0; }"
        skel = extract(parse(src))
        vals = [a.values for a in enumerate_assignments(skel)]
        assert vals == [()]
        assert render(realize(skel, Assignment(()))) == render(parse(src))

    def test_source_matches_program(self, loop_skel):
        a = Assignment(("a", "b", "b", "b", "a", "b"))
        assert realize_source(loop_skel, a) == render(realize(loop_skel, a))

    @given(st.integers(0, 3000))
    @settings(max_examples=60, deadline=None)
    def test_every_variant_parses(self, seed):
        skel = random_skeleton(seed, max_naive=512)
        for a in enumerate_assignments(skel):
            realize(skel, a)  # ParseError here would fail the test


class TestSignatureInvariance:
    @given(st.integers(0, 3000), st.integers(0, 10**6))
    @settings(max_examples=80, deadline=None)
    def test_compact_renaming_preserves_signature(self, seed, perm_seed):
        skel = random_skeleton(seed, max_naive=2048)
        rng = random.Random(perm_seed)
        pools = pools_of_program(skel.program)
        mapping = {}
        for pool in pools:
            image = list(pool)
            rng.shuffle(image)
            mapping.update(zip(pool, image))
        a = skel.origin_assignment
        b = Assignment(tuple(mapping.get(v, v) for v in a.values))
        assert canonical_signature(skel, a) == canonical_signature(skel, b)
        assert alpha_equivalent(skel, a, b, Granularity.INTRA)


class TestRandomSkeletonOrbits:
    def test_forty_seeds(self):
        for seed in range(40):
            skel = random_skeleton(seed, max_naive=2048)
            check_orbit_bijection(skel)

    def test_paper_subset_when_supported(self):
        from spe.combinat import ScopeNestingError

        checked = 0
        for seed in range(40):
            skel = random_skeleton(seed, max_naive=2048)
            comp = set(stream_vectors(skel, Mode.COMPLETE))
            try:
                paper = set(stream_vectors(skel, Mode.PAPER))
            except ScopeNestingError:
                continue
            assert paper <= comp
            checked += 1
        assert checked >= 20


class TestVariantStream:
    def test_names_and_sequence(self, loop_skel):
        rows = list(variants(loop_skel))
        assert len(rows) == 32
        assert [v.seq for v in rows] == list(range(1, 33))
        assert all(v.ok for v in rows)
        assert variant_name("loop", 3, 2) == "loop__v03.c"
        assert variant_name("loop", 3, 4) == "loop__v0003.c"

    def test_limit_is_stream_prefix(self, loop_skel):
        head = [v.assignment.values for v in variants(loop_skel, limit=5)]
        full = stream_vectors(loop_skel)
        assert head == full[:5]

    def test_deterministic_rerun(self, loop_skel):
        one = [(v.seq, v.source) for v in variants(loop_skel)]
        two = [(v.seq, v.source) for v in variants(loop_skel)]
        assert one == two


class TestPlan:
    def test_threshold_decisions(self, loop_skel):
        p = plan(loop_skel, threshold=10)
        assert p.selected_count == 32 and not p.within_threshold
        p = plan(loop_skel, threshold=32)
        assert p.within_threshold
        p = plan(loop_skel, threshold=10, cap=5)
        assert p.emit_limit == 5

    def test_paper_mode_unsupported_reports_none(self):
        src = """
int main(void) {
    int a = 1;
    if (a) {
        int b = 2;
        if (b) {
            int c = 3;
            c = a + b;
        }
    }
    return 0;
}
"""
        skel = extract(parse(src))
        p = plan(skel, Mode.PAPER)
        assert not p.supported and p.selected_count is None
        q = plan(skel, Mode.COMPLETE)
        assert q.supported
