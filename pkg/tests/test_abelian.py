"""Torus-target engine: worked systems, surjection bookkeeping, invariances."""

from __future__ import annotations

import random
from itertools import permutations

import pytest

from coincidence_kit.abelian import (
    AbelianHom,
    AbelianSystem,
    divisibility_report,
    ker_psi_order,
    ker_psi_order_bruteforce,
    permute_system,
    reid_multi,
    reid_pair,
    stacked_difference,
)
from coincidence_kit.cardinal import Cardinal, INFINITE, cardinal_product
from coincidence_kit.errors import ShapeError
from coincidence_kit.exact_linalg import IntMatrix, cokernel_order

# Four circle-valued maps on the 3-torus; the running example.
TORUS4 = AbelianSystem([[[1, 1, 1]], [[3, 5, 2]], [[3, 7, 3]], [[2, 1, 3]]])


def _sub(system, keep):
    return AbelianSystem([system.homs[i] for i in keep])


def _value(system) -> Cardinal:
    return cokernel_order(stacked_difference(system))


def random_system(rng, k=None, n=None, m=None, lo=-6, hi=6):
    k = k or rng.randint(2, 4)
    n = n or rng.randint(1, 2)
    m = m or rng.randint(1, 3)
    return AbelianSystem(
        [
            [[rng.randint(lo, hi) for _ in range(m)] for _ in range(n)]
            for _ in range(k)
        ]
    )


class TestWorkedSystem:
    def test_stacking(self):
        assert stacked_difference(TORUS4) == IntMatrix(
            [[2, 4, 1], [2, 6, 2], [1, 0, 2]]
        )

    def test_full_value_is_ten(self):
        report = reid_multi(TORUS4)
        assert report.value == Cardinal.finite(10)

    def test_sub_triples(self):
        assert _value(_sub(TORUS4, [0, 1, 2])) == Cardinal.finite(2)
        assert _value(_sub(TORUS4, [0, 1, 3])) == Cardinal.finite(1)
        assert _value(_sub(TORUS4, [0, 2, 3])) == Cardinal.finite(2)

    def test_leave_one_out_product_fails_to_divide(self):
        report = divisibility_report(TORUS4)
        assert report.leave_one_out == (
            Cardinal.finite(2),
            Cardinal.finite(1),
            Cardinal.finite(2),
        )
        assert report.leave_one_out_product == Cardinal.finite(4)
        assert report.leave_one_out_divides is False

    def test_pairwise_product_divides_with_ker_psi_quotient(self):
        report = divisibility_report(TORUS4)
        assert report.pairwise == (
            Cardinal.finite(1),
            Cardinal.finite(2),
            Cardinal.finite(1),
        )
        assert report.pairwise_product == Cardinal.finite(2)
        assert report.pairwise_divides is True
        # frozen after the brute-force recount confirmed it
        assert report.ker_psi == Cardinal.finite(5)
        assert report.quotient == Cardinal.finite(5)
        assert report.quotient_equals_ker_psi is True

    def test_triple_ker_psi_is_one(self):
        triple = _sub(TORUS4, [0, 1, 2])
        assert ker_psi_order(triple) == Cardinal.finite(1)
        assert ker_psi_order_bruteforce(triple) == Cardinal.finite(1)

    def test_full_ker_psi_bruteforce_agrees(self):
        assert ker_psi_order_bruteforce(TORUS4) == Cardinal.finite(5)


class TestPairs:
    def test_pair_via_gcd(self):
        # coker of a 1x3 row is Z/gcd
        assert reid_pair([[1, 1, 1]], [[3, 5, 2]]) == Cardinal.finite(1)
        assert reid_pair([[1, 1, 1]], [[3, 7, 3]]) == Cardinal.finite(2)

    def test_equal_maps_give_infinite(self):
        assert reid_pair([[2, 3]], [[2, 3]]) == INFINITE

    def test_square_case_is_absolute_determinant(self):
        rng = random.Random(53)
        for _ in range(200):
            n = rng.randint(1, 3)
            a = [[rng.randint(-5, 5) for _ in range(n)] for _ in range(n)]
            b = [[rng.randint(-5, 5) for _ in range(n)] for _ in range(n)]
            diff = IntMatrix(b) - IntMatrix(a)
            from coincidence_kit.exact_linalg import determinant

            det = determinant(diff)
            expected = INFINITE if det == 0 else Cardinal.finite(abs(det))
            assert reid_pair(a, b) == expected

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ShapeError):
            reid_pair([[1, 2]], [[1], [2]])


class TestSurjectionLaw:
    def test_value_factors_through_pairwise_and_kernel(self):
        rng = random.Random(59)
        done = 0
        while done < 200:
            system = random_system(rng)
            value = _value(system)
            if not value.is_finite:
                continue
            pairwise = [reid_pair(system.homs[0], h) for h in system.homs[1:]]
            ker = ker_psi_order(system)
            assert cardinal_product(pairwise) * ker == value
            done += 1

    def test_value_bounds_pairwise_product(self):
        # the product of pairwise numbers never exceeds a finite total
        rng = random.Random(61)
        done = 0
        while done < 200:
            system = random_system(rng)
            value = _value(system)
            if not value.is_finite:
                continue
            pairwise = [reid_pair(system.homs[0], h) for h in system.homs[1:]]
            product = cardinal_product(pairwise)
            assert product.divides(value)
            assert product <= value
            done += 1

    def test_bruteforce_kernel_matches_lattice_route(self):
        rng = random.Random(67)
        done = 0
        while done < 60:
            system = random_system(rng, lo=-4, hi=4)
            value = _value(system)
            if not value.is_finite or value.value > 400:
                continue
            assert ker_psi_order_bruteforce(system) == ker_psi_order(system)
            done += 1


class TestInvariances:
    def test_permutation_invariance_exhaustive(self):
        rng = random.Random(71)
        for k in (2, 3, 4):
            for _ in range(70):
                system = random_system(rng, k=k)
                base = _value(system)
                for sigma in permutations(range(k)):
                    assert _value(permute_system(system, sigma)) == base

    def test_worked_system_all_orderings(self):
        for sigma in permutations(range(4)):
            assert _value(permute_system(TORUS4, sigma)) == Cardinal.finite(10)

    def test_zero_column_padding(self):
        rng = random.Random(73)
        for _ in range(200):
            system = random_system(rng)
            extra = rng.randint(1, 3)
            padded = AbelianSystem(
                [
                    h.matrix.hstack(IntMatrix.zeros(h.matrix.rows, extra))
                    for h in system.homs
                ]
            )
            assert _value(padded) == _value(system)

    def test_negating_differences(self):
        # replacing every map by its reflection through phi_1 negates all
        # difference blocks and cannot change the value
        rng = random.Random(79)
        for _ in range(200):
            system = random_system(rng)
            base = system.homs[0].matrix
            reflected = AbelianSystem(
                [base] + [base - (h.matrix - base) for h in system.homs[1:]]
            )
            assert _value(reflected) == _value(system)

    def test_prop_shape_for_two_column_rows(self):
        # phi_j - phi_1 = d_j * (coprime row): value is d_12 d_13 |AD - BC|
        rng = random.Random(83)
        from math import gcd

        done = 0
        while done < 200:
            a, b = rng.randint(-5, 5), rng.randint(-5, 5)
            c, d = rng.randint(-5, 5), rng.randint(-5, 5)
            if gcd(a, b) != 1 or gcd(c, d) != 1:
                continue
            d12, d13 = rng.randint(1, 6), rng.randint(1, 6)
            base = [[rng.randint(-4, 4), rng.randint(-4, 4)]]
            phi2 = [[base[0][0] + d12 * a, base[0][1] + d12 * b]]
            phi3 = [[base[0][0] + d13 * c, base[0][1] + d13 * d]]
            system = AbelianSystem([base, phi2, phi3])
            det = a * d - b * c
            expected = INFINITE if det == 0 else Cardinal.finite(d12 * d13 * abs(det))
            assert _value(system) == expected
            assert reid_pair(system.homs[0], system.homs[1]) == Cardinal.finite(d12)
            assert reid_pair(system.homs[0], system.homs[2]) == Cardinal.finite(d13)
            done += 1


class TestReports:
    def test_all_equal_maps_not_applicable(self):
        h = [[2, 1]]
        report = divisibility_report(AbelianSystem([h, h, h]))
        assert report.applicable is False
        assert "not applicable" in report.witness

    def test_report_invariant_guard(self):
        report = reid_multi(TORUS4)
        assert report.value.is_finite
        assert all(p.is_finite for p in report.pairwise)
        assert report.ker_psi_order == Cardinal.finite(5)
        assert any("invariant factors" in line for line in report.trace)

    def test_nielsen_annotation_present(self):
        report = reid_multi(TORUS4)
        assert "Nielsen" in report.intermediates["nielsen_note"]

    def test_system_needs_two_maps(self):
        with pytest.raises(ShapeError):
            AbelianSystem([[[1, 2]]])

    def test_ker_psi_requires_finite_value(self):
        h = AbelianHom([[1, 0]])
        with pytest.raises(ValueError):
            ker_psi_order(AbelianSystem([h, h]))
