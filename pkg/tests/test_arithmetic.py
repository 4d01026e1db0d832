"""Tests for integer lattice enumeration, characters, and Hecke cosets.

The enumeration oracle is an independent brute force that walks (b, c)
pairs and factors 1 + bc into divisor pairs (a, d), so it shares no
structure with the production loop (which walks (c, d) and solves for b).
Character oracles are Euler's criterion for the quadratic symbol and
hand-built residue tables.
"""

import math

import numpy as np
import pytest

from sl2kernels.arithmetic import (
    CountSummary,
    DirichletCharacter,
    HeckeCoset,
    IntegerMatrix,
    LatticeQuery,
    apply_hecke,
    chi_eval,
    count_gamma0,
    enumerate_gamma0,
    hecke_cosets,
    kronecker_symbol,
)
from sl2kernels.errors import (
    CoprimalityError,
    DomainError,
    NotInGroup,
    OverflowGuard,
)
from sl2kernels.group import GroupElement
from sl2kernels.harmonics import phi_basic


def brute_force_lattice(query: LatticeQuery) -> set:
    """Independent enumeration: factor 1 + bc over divisor pairs."""
    amax = int(math.floor(query.bound_a))
    bmax = int(math.floor(query.bound_b))
    cmax = int(math.floor(query.bound_c))
    dmax = int(math.floor(query.bound_d))
    out = set()

    def push(a, b, c, d):
        m = IntegerMatrix(a, b, c, d)
        if abs(a) <= amax and abs(b) <= bmax and abs(d) <= dmax and query.admits(m):
            out.add((a, b, c, d))

    for c in range(-cmax, cmax + 1):
        if c % query.q:
            continue
        for b in range(-bmax, bmax + 1):
            m = 1 + b * c
            if m == 0:
                # ad = 0: one of the diagonal entries vanishes.
                for d in range(-dmax, dmax + 1):
                    push(0, b, c, d)
                for a in range(-amax, amax + 1):
                    if a != 0:
                        push(a, b, c, 0)
                continue
            for e in range(1, int(math.isqrt(abs(m))) + 1):
                if abs(m) % e:
                    continue
                f = abs(m) // e
                for a in {e, -e, f, -f}:
                    d, rem = divmod(m, a)
                    if rem == 0:
                        push(a, b, c, d)
    return out


class TestIntegerMatrix:
    def test_determinant_validation(self):
        m = IntegerMatrix(2, 1, 1, 1)
        assert m.entries() == (2, 1, 1, 1)
        with pytest.raises(DomainError):
            IntegerMatrix(2, 0, 0, 1)
        with pytest.raises(DomainError):
            IntegerMatrix(1.0, 0, 0, 1)

    def test_to_group(self):
        g = IntegerMatrix(1, 3, 0, 1).to_group()
        assert isinstance(g, GroupElement)
        assert (g.a, g.b, g.c, g.d) == (1.0, 3.0, 0.0, 1.0)

    def test_u_skewed(self):
        assert IntegerMatrix(1, 0, 0, 1).u_skewed() == 0.0
        assert IntegerMatrix(0, 1, -1, 0).u_skewed() == 0.0
        assert IntegerMatrix(1, 1, 0, 1).u_skewed() == 0.25
        # Skewing by R divides b and multiplies c.
        assert IntegerMatrix(1, 2, 0, 1).u_skewed(2.0) == 0.25

    def test_ordering_key(self):
        ms = [IntegerMatrix(1, 1, 0, 1), IntegerMatrix(0, -1, 1, 0), IntegerMatrix(1, 0, 0, 1)]
        ordered = sorted(ms)
        keys = [(m.c, m.d, m.a, m.b) for m in ordered]
        assert keys == sorted(keys)


class TestLatticeQuery:
    def test_ball_entry_bounds(self):
        qy = LatticeQuery.ball(3, 8.0, R=2.0)
        s = 2.0 * math.sqrt(9.0)
        assert qy.bound_a == s and qy.bound_d == s
        assert qy.bound_b == 2.0 * s and qy.bound_c == s / 2.0

    def test_invalid_level(self):
        with pytest.raises(DomainError):
            LatticeQuery.box(0, 5.0)

    def test_invalid_bounds(self):
        with pytest.raises(DomainError):
            LatticeQuery.box(1, -1.0)
        with pytest.raises(DomainError):
            LatticeQuery.ball(1, -0.5)

    def test_overflow_guard(self):
        with pytest.raises(OverflowGuard):
            LatticeQuery.box(1, 2.0**63)
        with pytest.raises(OverflowGuard):
            LatticeQuery.ball(1, 2.0**124)


class TestEnumeration:
    def test_level_one_tiny_ball(self):
        got = [m.entries() for m in enumerate_gamma0(LatticeQuery.ball(1, 0.0))]
        assert sorted(got) == sorted(
            [(1, 0, 0, 1), (-1, 0, 0, -1), (0, 1, -1, 0), (0, -1, 1, 0)]
        )

    def test_level_two_tiny_ball(self):
        got = [m.entries() for m in enumerate_gamma0(LatticeQuery.ball(2, 0.0))]
        assert sorted(got) == sorted([(1, 0, 0, 1), (-1, 0, 0, -1)])

    def test_unit_box_count(self):
        # Exhaustive oracle: determinant-one sign patterns over {-1,0,1}^4.
        import itertools

        want = {
            t
            for t in itertools.product((-1, 0, 1), repeat=4)
            if t[0] * t[3] - t[1] * t[2] == 1
        }
        got = {m.entries() for m in enumerate_gamma0(LatticeQuery.box(1, 1.0))}
        assert got == want
        assert len(got) == 20

    def test_exactness_and_membership(self):
        for m in enumerate_gamma0(LatticeQuery.box(4, 6.0)):
            a, b, c, d = m.entries()
            assert a * d - b * c == 1
            assert c % 4 == 0

    def test_deterministic_order(self):
        keys = [(m.c, m.d, m.a, m.b) for m in enumerate_gamma0(LatticeQuery.box(1, 4.0))]
        assert keys == sorted(keys)
        assert len(keys) == len(set(keys))

    @pytest.mark.parametrize("q,bound", [(1, 6.0), (2, 7.0), (3, 9.0), (5, 8.0)])
    def test_box_against_brute_force(self, q, bound):
        query = LatticeQuery.box(q, bound)
        got = {m.entries() for m in enumerate_gamma0(query)}
        assert got == brute_force_lattice(query)

    @pytest.mark.parametrize("q,Y,R", [(1, 4.0, 1.0), (2, 9.0, 0.5), (3, 6.0, 2.0)])
    def test_ball_against_brute_force(self, q, Y, R):
        query = LatticeQuery.ball(q, Y, R)
        got = {m.entries() for m in enumerate_gamma0(query)}
        assert got == brute_force_lattice(query)
        for a, b, c, d in got:
            assert IntegerMatrix(a, b, c, d).u_skewed(R) <= Y

    def test_asymmetric_box(self):
        query = LatticeQuery.box(2, 3.0, bound_b=9.0, bound_c=5.0, bound_d=2.0)
        got = {m.entries() for m in enumerate_gamma0(query)}
        assert got == brute_force_lattice(query)


class TestCounting:
    def test_partition(self):
        s = count_gamma0(LatticeQuery.ball(5, 25.0))
        assert s.total == s.b0 + s.c0 + s.bc

    def test_tiny_ball_split(self):
        s = count_gamma0(LatticeQuery.ball(1, 0.0))
        assert s.to_json() == {"total": 4, "b0": 2, "c0": 0, "bc": 2}

    def test_growth_regression(self):
        # Counts in the ball u <= X^2 grow like the volume, so the ratio
        # count/X^2 stays within a fixed window as X doubles.
        # Frozen at first run: 26.25, 24.06, 24.27, 24.36 (the classical
        # lattice-point density gives 24 in this scaling).
        ratios = []
        for X in (4, 8, 16, 32):
            s = count_gamma0(LatticeQuery.ball(1, float(X * X)))
            ratios.append(s.total / X**2)
        assert max(ratios) <= 30.0
        assert min(ratios) >= 20.0
        assert max(ratios) / min(ratios) <= 1.2


class TestKroneckerSymbol:
    def test_euler_criterion_oracle(self):
        rng = np.random.default_rng(11)
        primes = [p for p in range(3, 400, 2) if all(p % r for r in range(2, p))]
        for p in rng.choice(primes, size=25):
            p = int(p)
            for a in rng.integers(-50, 50, size=8):
                a = int(a)
                want = pow(a % p, (p - 1) // 2, p)
                want = {0: 0, 1: 1, p - 1: -1}[want]
                assert kronecker_symbol(a, p) == want

    def test_period_minus_four(self):
        # The discriminant -4 character is the nontrivial character mod 4.
        for n in range(-20, 21):
            want = 0 if n % 2 == 0 else (1 if n % 4 == 1 else -1)
            assert kronecker_symbol(-4, n) == want

    def test_period_eight(self):
        for n in range(1, 40, 2):
            want = 1 if n % 8 in (1, 7) else -1
            assert kronecker_symbol(8, n) == want

    def test_multiplicative_in_bottom_argument(self):
        rng = np.random.default_rng(3)
        for _ in range(60):
            a, m, n = (int(v) for v in rng.integers(-30, 30, size=3))
            if m * n != 0:
                assert kronecker_symbol(a, m * n) == kronecker_symbol(
                    a, m
                ) * kronecker_symbol(a, n)

    def test_unit_second_argument(self):
        assert kronecker_symbol(5, 1) == 1
        assert kronecker_symbol(5, -1) == 1
        assert kronecker_symbol(-5, -1) == -1
        assert kronecker_symbol(0, 1) == 1
        assert kronecker_symbol(0, 5) == 0


class TestDirichletCharacter:
    def test_principal(self):
        chi = DirichletCharacter.principal(6)
        assert chi(5) == 1 and chi(7) == 1
        assert chi(2) == 0 and chi(3) == 0 and chi(6) == 0
        assert chi.kappa == 0

    def test_kronecker_minus_four(self):
        chi = DirichletCharacter.kronecker(-4)
        assert chi.q == 4 and chi.kappa == 1
        assert chi(3) == -1 and chi(5) == 1 and chi(2) == 0
        assert chi(-1) == -1

    def test_kronecker_positive(self):
        chi = DirichletCharacter.kronecker(5)
        assert chi.kappa == 0 and chi(-1) == 1
        # chi is even and real with period 5.
        for n in range(1, 30):
            assert chi(n) == chi(n + 5)

    def test_kronecker_rejects_bad_discriminant(self):
        for D in (2, 3, -1, -2, 0):
            with pytest.raises(DomainError):
                DirichletCharacter.kronecker(D)

    def test_table_character(self):
        chi = DirichletCharacter.from_table(5, {1: 1, 2: 1j, 3: -1j, 4: -1})
        assert chi.kappa == 1
        assert chi(7) == 1j and chi(5) == 0
        assert chi(-1) == -1

    def test_table_rejects_non_multiplicative(self):
        with pytest.raises(DomainError):
            DirichletCharacter.from_table(5, {1: 1, 2: 1, 3: -1, 4: 1})

    def test_table_rejects_incomplete(self):
        with pytest.raises(DomainError):
            DirichletCharacter.from_table(5, {1: 1, 4: 1})

    def test_parity_invariant(self):
        for chi in (
            DirichletCharacter.principal(7),
            DirichletCharacter.kronecker(-4),
            DirichletCharacter.kronecker(12),
            DirichletCharacter.from_table(5, {1: 1, 2: -1, 3: -1, 4: 1}),
        ):
            assert chi(-1) == (-1) ** chi.kappa


class TestChiEval:
    def test_reads_lower_right_entry(self):
        chi = DirichletCharacter.kronecker(-4)
        gamma = IntegerMatrix(1, 1, 4, 5)
        assert chi_eval(chi, gamma) == kronecker_symbol(-4, 5)
        gamma = IntegerMatrix(3, 2, 4, 3)
        assert chi_eval(chi, gamma) == -1

    def test_accepts_float_group_element(self):
        chi = DirichletCharacter.principal(2)
        g = GroupElement(1.0, 0.0, 2.0, 1.0)
        assert chi_eval(chi, g) == 1

    def test_level_membership(self):
        chi = DirichletCharacter.principal(4)
        with pytest.raises(NotInGroup):
            chi_eval(chi, IntegerMatrix(1, 0, 2, 1))

    def test_central_element_parity(self):
        minus_i = IntegerMatrix(-1, 0, 0, -1)
        assert chi_eval(DirichletCharacter.kronecker(-4), minus_i) == -1
        assert chi_eval(DirichletCharacter.principal(4), minus_i) == 1


class TestHeckeCosets:
    def test_unit_index(self):
        assert hecke_cosets(1) == [HeckeCoset(1, 0, 1)]

    def test_index_two(self):
        got = {(c.a, c.b, c.d) for c in hecke_cosets(2)}
        assert got == {(2, 0, 1), (1, 0, 2), (1, 1, 2)}

    def test_index_six_count(self):
        assert len(hecke_cosets(6)) == 12

    def test_sigma_one_sizes(self):
        def sigma1(h):
            return sum(d for d in range(1, h + 1) if h % d == 0)

        for h in list(range(1, 121)) + [1024, 5040, 9973, 10000]:
            assert len(hecke_cosets(h)) == sigma1(h)

    def test_representative_validation(self):
        with pytest.raises(DomainError):
            HeckeCoset(1, 2, 2)
        with pytest.raises(DomainError):
            HeckeCoset(-1, 0, 1)
        with pytest.raises(DomainError):
            hecke_cosets(0)

    def test_scaled_group_determinant(self):
        for c in hecke_cosets(12):
            g = c.scaled_group()
            assert g.a * g.d - g.b * g.c == pytest.approx(1.0, abs=1e-12)


class TestApplyHecke:
    def test_unit_index_is_identity(self):
        chi = DirichletCharacter.principal(1)
        g = GroupElement.n(0.3).mul(GroupElement.a_diag(1.7))
        f = lambda h: phi_basic(h, 0.3, 0)  # noqa: E731
        assert apply_hecke(f, 1, chi, g) == pytest.approx(f(g), abs=1e-14)

    def test_spherical_eigenvalue_index_two(self):
        # The three cosets at h = 2 sum against y^(1/2+nu) to the Hecke
        # eigenvalue 2^nu + 2^(-nu) at the identity.
        nu = 0.37
        chi = DirichletCharacter.principal(1)
        got = apply_hecke(
            lambda h: phi_basic(h, nu, 0), 2, chi, GroupElement.identity()
        )
        assert got == pytest.approx(2.0**nu + 2.0**-nu, rel=1e-12)

    def test_ramified_principal_drops_terms(self):
        # With the principal character mod 2 the a = 2 coset carries
        # weight zero, leaving the two lower cosets.
        nu = 0.25
        chi = DirichletCharacter.principal(2)
        got = apply_hecke(
            lambda h: phi_basic(h, nu, 0), 2, chi, GroupElement.identity()
        )
        want = (1.0 / math.sqrt(2.0)) * 2.0 * (0.5 ** (0.5 + nu))
        assert got == pytest.approx(want, rel=1e-12)

    def test_coprime_multiplicativity(self):
        chi = DirichletCharacter.kronecker(5)
        g = GroupElement.n(-0.4).mul(GroupElement.a_diag(0.9)).mul(GroupElement.k(1.1))
        f = lambda h: phi_basic(h, 0.45j, 2)  # noqa: E731
        nested = apply_hecke(lambda x: apply_hecke(f, 2, chi, x), 3, chi, g)
        direct = apply_hecke(f, 6, chi, g)
        assert nested == pytest.approx(direct, abs=1e-10 * (1 + abs(direct)))

    def test_coprimality_guard(self):
        chi = DirichletCharacter.kronecker(-4)
        with pytest.raises(CoprimalityError):
            apply_hecke(lambda g: 1.0, 2, chi, GroupElement.identity())
