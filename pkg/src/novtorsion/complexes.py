"""Based graded complexes of free modules over a Novikov ring.

A complex carries, per degree, an ordered tuple of named basis generators
and a differential matrix of degree +1.  The grading is either Z (modulus
None) or Z_m for an even modulus m; torsion computations collapse either
one to the parity grading.  Generator names are globally unique so that
text documents can reference them without degree qualifiers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .lattice import GroupElement, Lattice, g_neg
from .linalg import (
    Matrix,
    ShapeError,
    as_matrix,
    mat_mul,
    mat_mul_shaped,
    mat_sub,
    select_column_pivots,
    zeros,
)
from .series import NovikovElement, _min_cutoff


class ComplexStructureError(ValueError):
    """The data does not assemble into a valid based complex or chain map."""


class NotAcyclicError(ValueError):
    """The operation requires an acyclic complex."""


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    cutoff: Optional[Fraction]
    failures: tuple[str, ...] = ()


@dataclass(frozen=True)
class RanksReport:
    ranks: dict[int, int]
    cutoff: Optional[Fraction]

    @property
    def acyclic(self) -> bool:
        return all(r == 0 for r in self.ranks.values())


@dataclass(frozen=True)
class BasedComplex:
    lattice: Lattice
    modules: dict[int, tuple[str, ...]]
    differentials: dict[int, Matrix]
    modulus: Optional[int] = None

    def __post_init__(self):
        if self.modulus is not None:
            if self.modulus < 2 or self.modulus % 2:
                raise ComplexStructureError("grading modulus must be even and >= 2")
        modules = {int(d): tuple(names) for d, names in self.modules.items() if names}
        object.__setattr__(self, "modules", modules)
        seen = set()
        for d, names in modules.items():
            if self.modulus is not None and not 0 <= d < self.modulus:
                raise ComplexStructureError("degree %d outside Z_%d" % (d, self.modulus))
            for n in names:
                if n in seen:
                    raise ComplexStructureError("duplicate generator name %r" % n)
                seen.add(n)
        diffs = {}
        for d, mat in self.differentials.items():
            d = int(d)
            mat = as_matrix(mat)
            t = self.shift(d, 1)
            if len(mat) != self.rank(t):
                raise ComplexStructureError(
                    "differential at degree %d has %d rows, target rank is %d"
                    % (d, len(mat), self.rank(t))
                )
            for row in mat:
                if len(row) != self.rank(d):
                    raise ComplexStructureError(
                        "differential at degree %d has a row of length %d, source rank is %d"
                        % (d, len(row), self.rank(d))
                    )
                for e in row:
                    if e.lattice != self.lattice:
                        raise ComplexStructureError("differential entry over a different lattice")
            if mat:
                diffs[d] = mat
        object.__setattr__(self, "differentials", diffs)

    # -- basic structure ---------------------------------------------------

    def shift(self, d: int, by: int) -> int:
        if self.modulus is None:
            return d + by
        return (d + by) % self.modulus

    def degrees(self) -> tuple[int, ...]:
        return tuple(sorted(self.modules))

    def rank(self, d: int) -> int:
        return len(self.modules.get(d, ()))

    def total_rank(self) -> int:
        return sum(len(v) for v in self.modules.values())

    def generators(self, d: int) -> tuple[str, ...]:
        return self.modules.get(d, ())

    def differential(self, d: int) -> Matrix:
        mat = self.differentials.get(d)
        if mat is not None:
            return mat
        return zeros(self.lattice, self.rank(self.shift(d, 1)), self.rank(d))

    def euler_parity(self) -> tuple[int, int]:
        """Generator counts in even and odd degrees."""
        even = sum(len(v) for d, v in self.modules.items() if d % 2 == 0)
        odd = sum(len(v) for d, v in self.modules.items() if d % 2 == 1)
        return even, odd

    # -- validation ---------------------------------------------------------

    def validate(self) -> ValidationReport:
        """Check that the differential squares to zero entrywise.

        Shape consistency is enforced at construction; here each composite
        entry must have no known terms, and the report carries the weakest
        cutoff below which those zeros are certified.
        """
        failures = []
        cutoff: Optional[Fraction] = None
        for d, mat in sorted(self.differentials.items()):
            t = self.shift(d, 1)
            nxt = self.differentials.get(t)
            if nxt is None or not mat:
                continue
            square = mat_mul(nxt, mat)
            for i, row in enumerate(square):
                for j, e in enumerate(row):
                    if e.terms:
                        failures.append(
                            "d^2 from degree %d is nonzero at (%s <- %s): %s"
                            % (
                                d,
                                self.generators(self.shift(d, 2))[i],
                                self.generators(d)[j],
                                e,
                            )
                        )
                    else:
                        cutoff = _min_cutoff(cutoff, e.cutoff)
        return ValidationReport(not failures, cutoff, tuple(failures))

    def homology_ranks(self) -> RanksReport:
        """Per-degree homology ranks via unit-pivot Gaussian elimination."""
        ranks: dict[int, int] = {}
        rank_of_diff: dict[int, int] = {}
        cutoff: Optional[Fraction] = None
        for d, mat in self.differentials.items():
            sel = select_column_pivots(self.lattice, mat, ncols=self.rank(d))
            rank_of_diff[d] = sel.rank
            cutoff = _min_cutoff(cutoff, sel.cutoff)
        for d in self.degrees():
            incoming = rank_of_diff.get(self.shift(d, -1), 0)
            outgoing = rank_of_diff.get(d, 0)
            ranks[d] = self.rank(d) - incoming - outgoing
            if ranks[d] < 0:
                raise ComplexStructureError(
                    "rank bookkeeping failed at degree %d; is d^2 = 0?" % d
                )
        return RanksReport(ranks, cutoff)

    # -- parity collapse -----------------------------------------------------

    def collapse(self):
        """Collapse to the parity grading.

        Returns (even_names, odd_names, d_even, d_odd) where d_even maps the
        even part to the odd part and d_odd maps back.
        """
        even_degrees = [d for d in self.degrees() if d % 2 == 0]
        odd_degrees = [d for d in self.degrees() if d % 2 == 1]
        names0 = [n for d in even_degrees for n in self.generators(d)]
        names1 = [n for d in odd_degrees for n in self.generators(d)]
        off0 = {}
        pos = 0
        for d in even_degrees:
            off0[d] = pos
            pos += self.rank(d)
        off1 = {}
        pos = 0
        for d in odd_degrees:
            off1[d] = pos
            pos += self.rank(d)
        z = NovikovElement.zero(self.lattice)
        d0 = [[z] * len(names0) for _ in range(len(names1))]
        d1 = [[z] * len(names1) for _ in range(len(names0))]
        for d, mat in self.differentials.items():
            t = self.shift(d, 1)
            if d % 2 == 0:
                ro, co = off1[t], off0[d]
                block = d0
            else:
                ro, co = off0[t], off1[d]
                block = d1
            for i, row in enumerate(mat):
                for j, e in enumerate(row):
                    block[ro + i][co + j] = e
        return tuple(names0), tuple(names1), as_matrix(d0), as_matrix(d1)


@dataclass(frozen=True)
class ChainMap:
    source: BasedComplex
    target: BasedComplex
    matrices: dict[int, Matrix]

    def __post_init__(self):
        if self.source.lattice != self.target.lattice:
            raise ComplexStructureError("chain map between complexes over different lattices")
        if self.source.modulus != self.target.modulus:
            raise ComplexStructureError("chain map between complexes with different gradings")
        mats = {}
        for d, mat in self.matrices.items():
            d = int(d)
            mat = as_matrix(mat)
            if len(mat) != self.target.rank(d) or any(
                len(r) != self.source.rank(d) for r in mat
            ):
                raise ComplexStructureError("chain map block at degree %d has wrong shape" % d)
            if mat:
                mats[d] = mat
        object.__setattr__(self, "matrices", mats)

    def block(self, d: int) -> Matrix:
        mat = self.matrices.get(d)
        if mat is not None:
            return mat
        return zeros(self.source.lattice, self.target.rank(d), self.source.rank(d))

    def validate(self) -> ValidationReport:
        """Check the commuting condition d_target f = f d_source entrywise."""
        failures = []
        cutoff: Optional[Fraction] = None
        lattice = self.source.lattice
        degrees = set(self.source.degrees()) | set(self.target.degrees())
        for d in sorted(degrees):
            t = self.source.shift(d, 1)
            lhs = mat_mul_shaped(
                lattice,
                self.target.differential(d),
                self.block(d),
                self.target.rank(t),
                self.target.rank(d),
                self.source.rank(d),
            )
            rhs = mat_mul_shaped(
                lattice,
                self.block(t),
                self.source.differential(d),
                self.target.rank(t),
                self.source.rank(t),
                self.source.rank(d),
            )
            for i, row in enumerate(mat_sub(lhs, rhs)):
                for j, e in enumerate(row):
                    if e.terms:
                        failures.append(
                            "square at degree %d fails at entry (%d,%d): %s" % (d, i, j, e)
                        )
                    else:
                        cutoff = _min_cutoff(cutoff, e.cutoff)
        return ValidationReport(not failures, cutoff, tuple(failures))


def mapping_cone(f: ChainMap) -> BasedComplex:
    """Cone complex of a chain map.

    Degree d of the cone is target^d plus source^{d+1}; the differential is
    the block matrix with the target differential, the source differential
    shifted, and the connecting block (-1)^{d+1} f^{d+1}.  The basis is the
    target basis followed by the shifted source basis, with generator names
    prefixed ``t_`` and ``s_``.
    """
    report = f.validate()
    if not report.valid:
        raise ComplexStructureError(
            "mapping cone of a non-chain-map: %s" % (report.failures[0],)
        )
    src, tgt = f.source, f.target
    lattice = tgt.lattice
    modulus = tgt.modulus

    def shift(d, by):
        return d + by if modulus is None else (d + by) % modulus

    degrees = set(tgt.degrees()) | {shift(d, -1) for d in src.degrees()}
    modules = {}
    for d in degrees:
        names = tuple("t_" + n for n in tgt.generators(d)) + tuple(
            "s_" + n for n in src.generators(shift(d, 1))
        )
        if names:
            modules[d] = names
    diffs = {}
    for d in sorted(degrees):
        t = shift(d, 1)
        r2, c2 = tgt.rank(t), tgt.rank(d)
        r1, c1 = src.rank(shift(d, 2)), src.rank(t)
        if (r2 + r1) == 0 or (c2 + c1) == 0:
            continue
        d2 = tgt.differential(d)
        d1 = src.differential(t)
        fb = f.block(t)
        sign = -1 if (d + 1) % 2 else 1
        z = NovikovElement.zero(lattice)
        rows = []
        for i in range(r2):
            top = [d2[i][j] for j in range(c2)]
            cross = [fb[i][j] * sign for j in range(c1)]
            rows.append(tuple(top + cross))
        for i in range(r1):
            rows.append(tuple([z] * c2 + [d1[i][j] for j in range(c1)]))
        if any(e.terms or e.cutoff is not None for row in rows for e in row):
            diffs[d] = as_matrix(rows)
    return BasedComplex(lattice, modules, diffs, modulus)


def rebase(cplx: BasedComplex, transitions: dict[int, Matrix], inverses: dict[int, Matrix]) -> BasedComplex:
    """Express the complex in new bases.

    ``transitions[d]`` writes the new degree-d basis in terms of the old one
    (columns are the new basis vectors); ``inverses[d]`` must be its exact
    inverse, typically built alongside it from elementary operations.  The
    differential transforms to T_{d+1}^{-1} D_d T_d.
    """
    for d, t in transitions.items():
        n = cplx.rank(d)
        if len(t) != n or any(len(r) != n for r in t):
            raise ShapeError("transition at degree %d must be %dx%d" % (d, n, n))
        inv = inverses.get(d)
        if inv is None:
            raise ValueError("missing inverse transition for degree %d" % d)
        prod = mat_mul(t, inv)
        for i, row in enumerate(prod):
            for j, e in enumerate(row):
                want = Fraction(1) if i == j else Fraction(0)
                if dict(e.terms) != ({cplx.lattice.identity(): want} if want else {}):
                    raise ValueError("transition and inverse at degree %d do not cancel" % d)
    diffs = {}
    for d in set(cplx.differentials):
        t = cplx.shift(d, 1)
        mat = cplx.differential(d)
        if d in transitions:
            mat = mat_mul(mat, transitions[d])
        if t in inverses:
            mat = mat_mul(inverses[t], mat)
        diffs[d] = mat
    return BasedComplex(cplx.lattice, dict(cplx.modules), diffs, cplx.modulus)


def relabel_lifts(cplx: BasedComplex, shifts: dict[int, tuple[GroupElement, ...]]) -> BasedComplex:
    """Multiply basis generators by group monomials (a change of lift).

    ``shifts[d][i]`` rescales the i-th degree-d generator by the monomial of
    that group element; the torsion class in the Whitehead quotient must not
    see the difference.
    """
    transitions = {}
    inverses = {}
    for d, elems in shifts.items():
        n = cplx.rank(d)
        if len(elems) != n:
            raise ShapeError("need one group element per degree-%d generator" % d)
        z = NovikovElement.zero(cplx.lattice)
        t_rows = []
        i_rows = []
        for i in range(n):
            t_rows.append(
                tuple(
                    NovikovElement.monomial(cplx.lattice, 1, elems[i]) if i == j else z
                    for j in range(n)
                )
            )
            i_rows.append(
                tuple(
                    NovikovElement.monomial(cplx.lattice, 1, g_neg(elems[i])) if i == j else z
                    for j in range(n)
                )
            )
        transitions[d] = as_matrix(t_rows)
        inverses[d] = as_matrix(i_rows)
    return rebase(cplx, transitions, inverses)


def two_term_complex(
    lattice: Lattice,
    entry: NovikovElement,
    low_degree: int = 1,
    names: tuple[str, str] = ("a", "b"),
    modulus: Optional[int] = None,
) -> BasedComplex:
    """The complex 0 -> L -> L -> 0 with the given differential entry."""
    lo, hi = names
    d = low_degree
    return BasedComplex(
        lattice,
        {d: (lo,), d + 1 if modulus is None else (d + 1) % modulus: (hi,)},
        {d: ((entry,),)},
        modulus,
    )
