"""Integer-level machinery for congruence lattices and Hecke systems.

Everything upstream of real-matrix evaluation stays in exact integer
arithmetic: enumeration of the level-q lattice under box or skewed-ball
constraints, Dirichlet characters (principal, real quadratic via the
Kronecker symbol, explicit tables), and Hecke coset representatives.
Conversion to floating GroupElements happens only at the boundary, so
membership tests (determinant one, q | c) are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping

from .errors import (
    CoprimalityError,
    DomainError,
    NotInGroup,
    OverflowGuard,
)
from .group import GroupElement

__all__ = [
    "IntegerMatrix",
    "LatticeQuery",
    "CountSummary",
    "enumerate_gamma0",
    "count_gamma0",
    "gamma0_index",
    "kronecker_symbol",
    "DirichletCharacter",
    "chi_eval",
    "HeckeCoset",
    "hecke_cosets",
    "apply_hecke",
]

# Entry bounds beyond this make 64-bit entry products unsafe in compiled
# consumers of the stream, so the query constructor refuses them.
_ENTRY_LIMIT = 2**62


# -- integer matrices ----------------------------------------------------------


@dataclass(frozen=True, order=True)
class IntegerMatrix:
    """A determinant-one integer matrix, ordered by (c, d, a, b)."""

    c: int
    d: int
    a: int
    b: int

    def __init__(self, a: int, b: int, c: int, d: int) -> None:
        for name, v in (("a", a), ("b", b), ("c", c), ("d", d)):
            if not isinstance(v, int):
                raise DomainError(f"entry {name}={v!r} is not an integer")
        if a * d - b * c != 1:
            raise DomainError(f"determinant of ({a},{b};{c},{d}) is not one")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    def to_group(self) -> GroupElement:
        return GroupElement(float(self.a), float(self.b), float(self.c), float(self.d))

    def u_skewed(self, R: float = 1.0) -> float:
        """Radial coordinate of a[R]^(-1) (a,b;c,d) a[R], exact for R = 1."""
        bb = self.b / R
        cc = self.c * R
        return (self.a * self.a + bb * bb + cc * cc + self.d * self.d - 2.0) / 4.0

    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d}


# -- lattice queries -----------------------------------------------------------


@dataclass(frozen=True)
class LatticeQuery:
    """Box or skewed-ball constraints for level-q lattice enumeration.

    A box query bounds each entry magnitude directly. A ball query keeps
    u_R(gamma) <= Y and converts internally to the entry bounds
    |a|, |d| <= 2 sqrt(Y+1), |b| <= 2R sqrt(Y+1), |c| <= 2 sqrt(Y+1)/R,
    then filters by the exact radial test.
    """

    q: int
    bound_a: float
    bound_b: float
    bound_c: float
    bound_d: float
    ball_Y: float | None = None
    ball_R: float = 1.0

    def __post_init__(self) -> None:
        if not isinstance(self.q, int) or self.q < 1:
            raise DomainError(f"level q={self.q!r} must be a positive integer")
        for name in ("bound_a", "bound_b", "bound_c", "bound_d"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name}={v} must be finite and positive")
            if v > _ENTRY_LIMIT:
                raise OverflowGuard(f"{name}={v} exceeds the 2^62 entry limit")

    @staticmethod
    def box(q: int, bound: float, *, bound_b: float | None = None,
            bound_c: float | None = None, bound_d: float | None = None) -> "LatticeQuery":
        """Entry-bound query; a single bound applies to all four entries."""
        return LatticeQuery(
            q,
            bound,
            bound if bound_b is None else bound_b,
            bound if bound_c is None else bound_c,
            bound if bound_d is None else bound_d,
        )

    @staticmethod
    def ball(q: int, Y: float, R: float = 1.0) -> "LatticeQuery":
        """Skewed-ball query u_R <= Y."""
        if not (math.isfinite(Y) and Y >= 0):
            raise DomainError(f"ball radius parameter Y={Y} must be >= 0")
        if not (math.isfinite(R) and R > 0):
            raise DomainError(f"skew R={R} must be positive")
        s = 2.0 * math.sqrt(Y + 1.0)
        return LatticeQuery(q, s, R * s, s / R, s, ball_Y=Y, ball_R=R)

    def admits(self, m: IntegerMatrix) -> bool:
        """Exact membership test beyond the integer entry bounds."""
        if self.ball_Y is None:
            return True
        return m.u_skewed(self.ball_R) <= self.ball_Y


# -- enumeration ---------------------------------------------------------------


def _int_bounds(query: LatticeQuery) -> tuple[int, int, int, int]:
    return (
        int(math.floor(query.bound_a)),
        int(math.floor(query.bound_b)),
        int(math.floor(query.bound_c)),
        int(math.floor(query.bound_d)),
    )


def enumerate_gamma0(query: LatticeQuery) -> Iterator[IntegerMatrix]:
    """Yield every level-q matrix within the query, each exactly once.

    The determinant equation fixes b = (ad - 1)/c once (c, d, a) are
    chosen, so the stream loops c over multiples of q, d over residues
    coprime to c, and a over the inverse residue class of d modulo |c|;
    the c = 0 branch contributes the unipotent rows. Order is ascending
    in (c, d, a, b).
    """
    amax, bmax, cmax, dmax = _int_bounds(query)
    q = query.q

    def c_zero_branch() -> Iterator[IntegerMatrix]:
        if amax < 1 or dmax < 1:
            return
        for s in (-1, 1):
            for b in range(-bmax, bmax + 1):
                m = IntegerMatrix(s, b, 0, s)
                if query.admits(m):
                    yield m

    def c_fixed_branch(c: int) -> Iterator[IntegerMatrix]:
        ac = abs(c)
        for d in range(-dmax, dmax + 1):
            if math.gcd(ac, abs(d)) != 1:
                continue
            a0 = pow(d, -1, ac) if ac > 1 else 0
            a_start = a0 - ((amax + a0) // ac) * ac
            for a in range(a_start, amax + 1, ac):
                b, rem = divmod(a * d - 1, c)
                if rem != 0 or abs(b) > bmax:
                    continue
                m = IntegerMatrix(a, b, c, d)
                if query.admits(m):
                    yield m

    for c in range(-cmax, cmax + 1):
        if c == 0:
            yield from c_zero_branch()
        elif c % q == 0:
            yield from c_fixed_branch(c)


@dataclass(frozen=True)
class CountSummary:
    """Three-way term split of a lattice count.

    b0 counts matrices with b = 0 (this bucket owns the identity-type
    terms where b = c = 0), c0 counts c = 0 with b nonzero, and bc the
    rest.
    """

    total: int
    b0: int
    c0: int
    bc: int

    def to_json(self) -> dict:
        return {"total": self.total, "b0": self.b0, "c0": self.c0, "bc": self.bc}


def count_gamma0(query: LatticeQuery) -> CountSummary:
    """Stream the enumeration and classify terms by vanishing entries."""
    b0 = c0 = bc = 0
    for m in enumerate_gamma0(query):
        if m.b == 0:
            b0 += 1
        elif m.c == 0:
            c0 += 1
        else:
            bc += 1
    return CountSummary(b0 + c0 + bc, b0, c0, bc)


def gamma0_index(q: int) -> int:
    """Index of the level-q lattice in the full integer lattice.

    Equals q times the product of (1 + 1/p) over distinct primes p
    dividing q, computed in exact integer arithmetic.
    """
    if not isinstance(q, int) or q < 1:
        raise DomainError(f"level q={q!r} must be a positive integer")
    index = q
    rest = q
    p = 2
    while p * p <= rest:
        if rest % p == 0:
            index = index // p * (p + 1)
            while rest % p == 0:
                rest //= p
        p += 1
    if rest > 1:
        index = index // rest * (rest + 1)
    return index


# -- Dirichlet characters ------------------------------------------------------


def kronecker_symbol(a: int, n: int) -> int:
    """Kronecker symbol (a|n), extending the Jacobi symbol to all integers."""
    if not isinstance(a, int) or not isinstance(n, int):
        raise DomainError("kronecker_symbol requires integer arguments")
    if n == 0:
        return 1 if abs(a) == 1 else 0
    if a % 2 == 0 and n % 2 == 0:
        return 0
    sign = 1
    if n < 0:
        n = -n
        if a < 0:
            sign = -1
    # Factors of two in n use the supplementary rule (a|2).
    twos = 0
    while n % 2 == 0:
        n //= 2
        twos += 1
    if twos % 2 == 1 and a % 8 in (3, 5):
        sign = -sign
    a %= n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                sign = -sign
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            sign = -sign
        a %= n
    return sign if n == 1 else 0


def _unit_residues(q: int) -> list[int]:
    return [r for r in range(1, q + 1) if math.gcd(r, q) == 1]


@dataclass(frozen=True)
class DirichletCharacter:
    """A character of (Z/q)^x evaluated on integers, zero off the units.

    Variants: principal (indicator of the units), kronecker (the real
    character n -> (D|n) for a discriminant D = 0, 1 mod 4), and table
    (explicit unit values, validated for complete multiplicativity).
    The parity kappa in {0, 1} satisfies chi(-1) = (-1)^kappa.
    """

    q: int
    variant: str
    kappa: int
    discriminant: int | None = None
    table: tuple[complex, ...] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if not isinstance(self.q, int) or self.q < 1:
            raise DomainError(f"modulus q={self.q!r} must be a positive integer")
        if self.variant not in ("principal", "kronecker", "table"):
            raise DomainError(f"unknown character variant {self.variant!r}")
        if self(-1) != (-1) ** self.kappa:
            raise DomainError("parity kappa does not match chi(-1)")

    @staticmethod
    def principal(q: int) -> "DirichletCharacter":
        return DirichletCharacter(q, "principal", 0)

    @staticmethod
    def kronecker(D: int) -> "DirichletCharacter":
        if not isinstance(D, int) or D == 0:
            raise DomainError("discriminant must be a nonzero integer")
        if D % 4 not in (0, 1):
            raise DomainError(f"D={D} is not 0 or 1 mod 4, so (D|.) is not periodic mod |D|")
        kappa = 0 if D > 0 else 1
        return DirichletCharacter(abs(D), "kronecker", kappa, discriminant=D)

    @staticmethod
    def from_table(q: int, values: Mapping[int, complex]) -> "DirichletCharacter":
        table = [0j] * q
        seen = set()
        for k, v in values.items():
            if math.gcd(k, q) != 1:
                raise DomainError(f"table key {k} is not a unit mod {q}")
            table[k % q] = complex(v)
            seen.add(k % q)
        units = [r % q for r in _unit_residues(q)]
        for r in units:
            if r not in seen:
                raise DomainError(f"table is missing the unit residue {r}")
        if table[1 % q] != 1:
            raise DomainError("a character must send 1 to 1")
        for r in units:
            for s in units:
                if abs(table[(r * s) % q] - table[r] * table[s]) > 1e-12:
                    raise DomainError(
                        f"table is not completely multiplicative at ({r},{s})"
                    )
        minus_one = table[(q - 1) % q]
        if abs(minus_one - 1) <= 1e-12:
            kappa = 0
        elif abs(minus_one + 1) <= 1e-12:
            kappa = 1
        else:
            raise DomainError("chi(-1) must be +1 or -1")
        return DirichletCharacter(q, "table", kappa, table=tuple(table))

    def __call__(self, n: int) -> complex:
        if not isinstance(n, int):
            raise DomainError(f"character argument {n!r} is not an integer")
        if math.gcd(n, self.q) != 1:
            return 0j
        if self.variant == "principal":
            return 1 + 0j
        if self.variant == "kronecker":
            return complex(kronecker_symbol(self.discriminant, n))
        return self.table[n % self.q]

    def is_principal(self) -> bool:
        return self.variant == "principal"


def _integer_entries(gamma) -> tuple[int, int, int, int]:
    if isinstance(gamma, IntegerMatrix):
        return gamma.entries()
    out = []
    for v in (gamma.a, gamma.b, gamma.c, gamma.d):
        r = round(v)
        if abs(v - r) > 1e-9:
            raise DomainError(f"entry {v} is not integral")
        out.append(int(r))
    return tuple(out)


def chi_eval(chi: DirichletCharacter, gamma) -> complex:
    """Evaluate the group character on a level-q matrix through its d entry."""
    a, b, c, d = _integer_entries(gamma)
    if c % chi.q != 0:
        raise NotInGroup(f"c={c} is not divisible by the level {chi.q}")
    if a * d - b * c != 1:
        raise NotInGroup(f"determinant of ({a},{b};{c},{d}) is not one")
    return chi(d)


# -- Hecke cosets --------------------------------------------------------------


@dataclass(frozen=True)
class HeckeCoset:
    """Upper-triangular representative (a, b; 0, d) with ad = h, 0 <= b < d."""

    a: int
    b: int
    d: int

    def __post_init__(self) -> None:
        if self.a < 1 or self.d < 1:
            raise DomainError("coset representative needs positive diagonal")
        if not 0 <= self.b < self.d:
            raise DomainError("offset b must satisfy 0 <= b < d")

    def scaled_group(self) -> GroupElement:
        s = 1.0 / math.sqrt(self.a * self.d)
        return GroupElement(self.a * s, self.b * s, 0.0, self.d * s)


def hecke_cosets(h: int) -> list[HeckeCoset]:
    """All representatives (a, b; 0, d), ad = h, 0 <= b < d; sigma_1(h) many."""
    if not isinstance(h, int) or h < 1:
        raise DomainError(f"Hecke index h={h!r} must be a positive integer")
    out = []
    for d in range(1, h + 1):
        if h % d:
            continue
        a = h // d
        for b in range(d):
            out.append(HeckeCoset(a, b, d))
    return out


def apply_hecke(
    f: Callable[[GroupElement], complex],
    h: int,
    chi: DirichletCharacter,
    g: GroupElement,
) -> complex:
    """Normalized Hecke average h^(-1/2) sum chi(a) f(h^(-1/2)(a,b;0,d) g)."""
    if not chi.is_principal() and math.gcd(h, chi.q) != 1:
        raise CoprimalityError(
            f"index h={h} shares a factor with the level {chi.q} of a "
            "nonprincipal character"
        )
    total = 0j
    for coset in hecke_cosets(h):
        w = chi(coset.a)
        if w == 0:
            continue
        total += w * complex(f(coset.scaled_group().mul(g)))
    return total / math.sqrt(h)
