import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nurho.nominal import (
    Atom,
    NameList,
    Permutation,
    SupportPreconditionError,
    apply_perm,
    canonical_perm,
    family_permutations,
    find_permutation,
    find_strong_support_violation,
    fresh_atom,
    is_fresh,
    orbit_canon,
    orbit_equal,
    strong_support_combine,
    support,
)

a0, a1, a2, a3, a4, a5 = (Atom("N", i) for i in range(6))
b0, b1 = Atom("1", 0), Atom("1", 1)


def atoms(fams=("N", "1"), max_index=3):
    return st.builds(Atom, st.sampled_from(fams), st.integers(0, max_index))


def small_values():
    leaf = st.one_of(atoms(), st.integers(0, 3), st.just("*"))
    return st.recursive(leaf, lambda c: st.tuples(c, c), max_leaves=6)


def perms(pool):
    pool = list(pool)
    return st.sampled_from(list(family_permutations(pool)))


class TestPermutation:
    def test_identity_and_swap(self):
        assert apply_perm(Permutation.identity(), (a0, a1)) == (a0, a1)
        sw = Permutation.swap(a0, a1)
        assert sw(a0) == a1 and sw(a1) == a0 and sw(a2) == a2

    def test_cross_family_rejected(self):
        with pytest.raises(ValueError):
            Permutation({a0: b0, b0: a0})

    def test_non_bijective_rejected(self):
        with pytest.raises(ValueError):
            Permutation({a0: a1})

    @given(perms([a0, a1, a2, b0, b1]), perms([a0, a1, a2, b0, b1]), small_values())
    @settings(max_examples=60, deadline=None)
    def test_action_laws(self, p1, p2, x):
        assert apply_perm(p1, apply_perm(p2, x)) == apply_perm(p1.compose(p2), x)
        assert apply_perm(Permutation.identity(), x) == x

    @given(perms([a0, a1, a2]), small_values())
    @settings(max_examples=60, deadline=None)
    def test_support_equivariance(self, pi, x):
        assert support(apply_perm(pi, x)) == frozenset(
            pi(a) for a in support(x)
        )


class TestSupport:
    def test_atom_support_is_itself(self):
        assert support(a0) == {a0}

    def test_closed_value_has_empty_support(self):
        assert support(("*", 3)) == frozenset()

    def test_pair_support_is_union(self):
        x, y = (a0, a1), (a1, b0)
        assert support((x, y)) == support(x) | support(y)

    def test_freshness(self):
        assert is_fresh(a2, (a0, a1))
        assert not is_fresh(a0, (a0, a1))
        sw = Permutation.swap(a2, a3)
        assert apply_perm(sw, (a0, a1)) == (a0, a1)


class TestNameList:
    def test_distinctness_enforced(self):
        with pytest.raises(ValueError):
            NameList((a0, a0))

    def test_list_is_strongly_supported_but_set_is_not(self):
        assert find_strong_support_violation(NameList((a0, a1))) is None
        violation = find_strong_support_violation(frozenset((a0, a1)))
        assert violation is not None
        assert apply_perm(violation, frozenset((a0, a1))) == frozenset((a0, a1))
        assert any(violation(a) != a for a in (a0, a1))


class TestOrbit:
    def test_same_family_pairs_identified(self):
        assert orbit_equal(NameList((a0, a1)), NameList((a3, a2)))

    def test_canonical_perm_witnesses(self):
        x = (a3, (a1, a3), b1)
        canon, pi = orbit_canon(x)
        assert apply_perm(pi, x) == canon
        assert canon == (a0, (a1, a0), b0)

    def test_orbit_distinguishes_diagonal(self):
        assert not orbit_equal((a0, a0), (a0, a1))

    @given(small_values(), perms([a0, a1, a2, b0]))
    @settings(max_examples=60, deadline=None)
    def test_orbit_equal_up_to_perm(self, x, pi):
        assert orbit_equal(x, apply_perm(pi, x))

    @given(small_values(), small_values())
    @settings(max_examples=60, deadline=None)
    def test_support_sizes_agree_on_orbit_equal(self, x, y):
        if orbit_equal(x, y):
            fams = lambda v: sorted(str(a.family) for a in support(v))
            assert fams(x) == fams(y)

    def test_find_permutation(self):
        pi = find_permutation((a0, a1), (a2, a0))
        assert pi is not None
        assert apply_perm(pi, (a0, a1)) == (a2, a0)
        assert find_permutation((a0, a0), (a0, a1)) is None


class TestStrongSupport:
    @given(small_values())
    @settings(max_examples=25, deadline=None)
    def test_structural_values_strongly_supported(self, x):
        assert find_strong_support_violation(x, extra=1) is None


class TestCombine:
    def test_already_equal(self):
        pi = strong_support_combine("*", "*", a0, a0, a1, a1)
        assert pi is not None
        assert pi(a0) == a0 and pi(a1) == a1

    def test_disjoint_renamings_merge(self):
        # x fixed, y: b -> c, z: d -> e, all distinct and fresh for x = a.
        b, c, d, e = a1, a2, a3, a4
        pi = strong_support_combine(a0, a0, b, c, d, e)
        assert pi is not None
        assert pi(a0) == a0 and pi(b) == c and pi(d) == e

    def test_combination_overlap_on_x(self):
        x1, x2 = NameList((a0, a1)), NameList((a1, a0))
        y1, y2 = (a0, a2), (a1, a3)
        z1, z2 = (a1, a4), (a0, a5)
        pi = strong_support_combine(x1, x2, y1, y2, z1, z2)
        assert pi is not None
        assert apply_perm(pi, (x1, y1, z1)) == (x2, y2, z2)

    def test_precondition_violation_reported(self):
        with pytest.raises(SupportPreconditionError):
            strong_support_combine("*", "*", a1, a1, a1, a1)

    def test_no_witness_returns_none(self):
        # y-side witnesses exist but z-side do not.
        assert strong_support_combine(a0, a0, a1, a2, (a3, a3), (a3, a4)) is None

    def test_brute_force_agreement_random(self):
        import random

        rng = random.Random(7)
        pool = [Atom("N", i) for i in range(6)]
        n_checked = 0
        while n_checked < 120:
            x1 = tuple(rng.sample(pool, rng.randint(0, 2)))
            y1 = tuple(rng.sample(pool, rng.randint(0, 3)))
            z1 = tuple(rng.sample(pool, rng.randint(0, 3)))
            pi0 = rng.choice(list(family_permutations(pool)))
            x2, y2, z2 = (apply_perm(pi0, v) for v in (x1, y1, z1))
            try:
                pi = strong_support_combine(x1, x2, y1, y2, z1, z2)
            except SupportPreconditionError:
                continue
            n_checked += 1
            assert pi is not None
            assert apply_perm(pi, (x1, y1, z1)) == (x2, y2, z2)
            # brute force confirms some permutation of the pool works
            assert any(
                apply_perm(q, (x1, y1, z1)) == (x2, y2, z2)
                for q in family_permutations(pool)
            )


def test_fresh_atom_least_index():
    assert fresh_atom("N", [a0, a1, a3]) == a2
    assert fresh_atom("N", []) == a0


def test_canonical_perm_idempotent():
    x = (a4, a2, (a4, b1))
    canon, _ = orbit_canon(x)
    again, pi = orbit_canon(canon)
    assert again == canon and pi.is_identity()
