"""Assignment enumeration, realization, and alpha-equivalence.

An Assignment is a characteristic vector: one variable name per hole.
Two assignments are alpha-equivalent when some renaming that permutes
variables only within their (scope, type) pool maps one onto the other;
`canonical_signature` decides this by reducing an assignment to its pool
configuration plus one restricted growth string per pool, which is
invariant under exactly those renamings.

`enumerate_assignments` walks the scoped-partition streams and emits one
representative per equivalence class: block labels in first-occurrence
order bind to the pool's variables in declaration order. The stream is
deterministic, duplicate-free, and at COMPLETE mode covers every class
of the naive product space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

from . import combinat
from .combinat import CountReport, Mode, ScopedPartition, count_plan, lazy_product
from .minilang.ast import Program
from .minilang.parser import ParseError, parse
from .minilang.render import render
from .skeleton import (
    Granularity,
    NormalForm,
    Skeleton,
    characteristic_vector,
    extract,
    normal_forms,
)

__all__ = [
    "Assignment",
    "CanonicalSignature",
    "InvalidRealization",
    "Variant",
    "EnumerationPlan",
    "enumerate_assignments",
    "naive_enumerate",
    "naive_count",
    "realize",
    "realize_source",
    "canonical_signature",
    "alpha_equivalent",
    "programs_alpha_equivalent",
    "variants",
    "variant_name",
    "plan",
]


@dataclass(frozen=True)
class Assignment:
    """A total map hole index -> variable name, as a vector in hole order."""

    values: tuple[str, ...]

    def value(self, index: int) -> str:
        return self.values[index - 1]

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class CanonicalSignature:
    """Name-free invariant of an assignment under compact renaming.

    parts: per family one (unit, type, config, per-pool RGS) tuple, in
    normal-form order. Equal signatures <=> alpha-equivalent assignments
    at the chosen granularity.
    """

    granularity: str
    parts: tuple[tuple[str, str, tuple[int, ...], tuple[tuple[int, ...], ...]], ...]


class InvalidRealization(Exception):
    """The assignment does not produce a well-formed program (possible
    only under --decl-holes, e.g. two declarations renamed alike)."""

    def __init__(self, assignment: Assignment, reason: str):
        super().__init__(reason)
        self.assignment = assignment
        self.reason = reason


# ---------------------------------------------------------------------------
# Enumeration


def _assignment_of(
    skel: Skeleton, nfs: list[NormalForm], parts_per_nf: tuple[ScopedPartition, ...]
) -> Assignment:
    values: list[Optional[str]] = [None] * skel.n
    for nf, sp in zip(nfs, parts_per_nf):
        for fam, fp in zip(nf.families, sp.parts):
            per_pool: dict[int, list[int]] = {}
            for pos, pool_i in enumerate(fp.config):
                per_pool.setdefault(pool_i, []).append(pos)
            for pool_i, rgs in enumerate(fp.rgs):
                pool_vars = fam.pools[pool_i].vars
                for pos, digit in zip(per_pool.get(pool_i, ()), rgs):
                    values[fam.holes[pos] - 1] = pool_vars[digit]
    assert all(v is not None for v in values)
    return Assignment(tuple(values))  # type: ignore[arg-type]


def enumerate_assignments(
    skel: Skeleton,
    mode: Mode = Mode.COMPLETE,
    granularity: Granularity = Granularity.INTRA,
) -> Iterator[Assignment]:
    """One representative assignment per alpha-equivalence class.

    Deterministic: units in program order, families in type order,
    partitions in lexicographic canonical order. PAPER mode propagates
    ScopeNestingError for units with nested variable-declaring blocks.
    """
    nfs = normal_forms(skel, granularity)
    factories = [
        (lambda nf=nf: combinat.partition_scope(nf, mode)) for nf in nfs
    ]
    for combo in lazy_product(factories):
        yield _assignment_of(skel, nfs, combo)


def naive_count(skel: Skeleton) -> int:
    total = 1
    for h in skel.holes:
        total *= len(h.var_set)
    return total


def naive_enumerate(skel: Skeleton, cap: int = 1_000_000) -> Iterator[Assignment]:
    """The full Cartesian product of every hole's variable set, in
    lexicographic order. Oracle use only; refuses when the product
    exceeds cap."""
    total = naive_count(skel)
    if total > cap:
        raise ValueError(f"naive space has {total} assignments, cap is {cap}")

    def rec(i: int, prefix: tuple[str, ...]) -> Iterator[Assignment]:
        if i == len(skel.holes):
            yield Assignment(prefix)
            return
        for name in skel.holes[i].names:
            yield from rec(i + 1, prefix + (name,))

    return rec(0, ())


# ---------------------------------------------------------------------------
# Realization


def realize_source(skel: Skeleton, assignment: Assignment) -> str:
    """Render the skeleton with each hole filled by its assigned name."""
    values = characteristic_vector(skel, assignment)
    overrides = {}
    for h, name in zip(skel.holes, values):
        if name != h.node.name:
            overrides[h.node] = name
    return render(skel.program, overrides)


def realize(skel: Skeleton, assignment: Assignment) -> Program:
    """Substitute, render, and re-parse, yielding a validated Program.

    Raises InvalidRealization when declaration-name holes collide or
    orphan an occurrence; without decl holes every assignment is valid
    and a parse failure here would be a bug, so it propagates.
    """
    source = realize_source(skel, assignment)
    try:
        return parse(source)
    except ParseError as e:
        if skel.decl_holes:
            raise InvalidRealization(assignment, str(e)) from e
        raise


# ---------------------------------------------------------------------------
# Alpha-equivalence


def canonical_signature(
    skel: Skeleton,
    assignment: Assignment,
    granularity: Granularity = Granularity.INTRA,
) -> CanonicalSignature:
    """Stable, name-free signature: per family, the pool each hole's
    variable belongs to and the RGS of each pool's value sequence."""
    values = characteristic_vector(skel, assignment)
    parts = []
    for nf in normal_forms(skel, granularity):
        for fam in nf.families:
            config = []
            per_pool: dict[int, list[str]] = {i: [] for i in range(len(fam.pools))}
            for pos, index in enumerate(fam.holes):
                name = values[index - 1]
                owner = None
                for pool_i in fam.eligible[pos]:
                    if name in fam.pools[pool_i].vars:
                        owner = pool_i
                        break
                assert owner is not None, "assigned name outside every pool"
                config.append(owner)
                per_pool[owner].append(name)
            rgs = tuple(
                combinat.rgs_of_vector(per_pool[i]) for i in range(len(fam.pools))
            )
            parts.append((nf.unit, fam.type, tuple(config), rgs))
    return CanonicalSignature(granularity=granularity.value, parts=tuple(parts))


def alpha_equivalent(
    skel: Skeleton,
    a1: Assignment,
    a2: Assignment,
    granularity: Granularity = Granularity.INTER,
) -> bool:
    """True iff a compact renaming maps one filling onto the other.

    Defaults to INTER because alpha-equivalence is a whole-program
    relation; pass INTRA to ask about the per-function approximation.
    """
    s1 = canonical_signature(skel, a1, granularity)
    s2 = canonical_signature(skel, a2, granularity)
    return s1 == s2


def programs_alpha_equivalent(p: Program, q: Program) -> bool:
    """Whole-program alpha-equivalence of two parsed programs.

    Both are skeletonized with declaration holes so every name position
    is abstracted; the programs are equivalent iff the name-free shapes
    match and their own fillings reduce to the same canonical signature.
    """
    sp, sq = extract(p, decl_holes=True), extract(q, decl_holes=True)
    shape_p = render(p, {h.node: f"__h{h.index}" for h in sp.holes})
    shape_q = render(q, {h.node: f"__h{h.index}" for h in sq.holes})
    if shape_p != shape_q:
        return False
    return canonical_signature(
        sp, sp.origin_assignment, Granularity.INTER
    ) == canonical_signature(sq, sq.origin_assignment, Granularity.INTER)


# ---------------------------------------------------------------------------
# Variant production


@dataclass(frozen=True)
class Variant:
    """One stream position: a realized program, or a skipped-invalid
    marker (source/program None and error set)."""

    seq: int  # 1-based position in the assignment stream
    assignment: Assignment
    source: Optional[str]
    program: Optional[Program]
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.program is not None


def variants(
    skel: Skeleton,
    mode: Mode = Mode.COMPLETE,
    granularity: Granularity = Granularity.INTRA,
    limit: Optional[int] = None,
) -> Iterator[Variant]:
    """Realize the enumeration stream; invalid realizations become
    markers rather than vanishing, so stream positions stay auditable."""
    for seq, a in enumerate(enumerate_assignments(skel, mode, granularity), start=1):
        if limit is not None and seq > limit:
            return
        try:
            program = realize(skel, a)
        except InvalidRealization as e:
            yield Variant(seq, a, None, None, e.reason)
            continue
        yield Variant(seq, a, render(program), program)


def variant_name(stem: str, seq: int, width: int) -> str:
    return f"{stem}__v{seq:0{width}d}.c"


# ---------------------------------------------------------------------------
# Planning


@dataclass(frozen=True)
class EnumerationPlan:
    """Counting plus the enumerate/skip decision for one skeleton."""

    report: CountReport
    mode: Mode
    granularity: Granularity
    threshold: int
    cap: Optional[int]

    @property
    def selected_count(self) -> Optional[int]:
        if self.mode is Mode.PAPER:
            return self.report.paper_mode_count
        return self.report.complete_mode_count

    @property
    def supported(self) -> bool:
        return self.selected_count is not None

    @property
    def within_threshold(self) -> bool:
        return self.supported and self.selected_count <= self.threshold

    @property
    def emit_limit(self) -> Optional[int]:
        """How many stream entries to produce, None for all of them."""
        if self.cap is not None:
            return self.cap
        return None


def plan(
    skel: Skeleton,
    mode: Mode = Mode.COMPLETE,
    granularity: Granularity = Granularity.INTRA,
    threshold: int = 10_000,
    cap: Optional[int] = None,
) -> EnumerationPlan:
    return EnumerationPlan(
        report=count_plan(skel, granularity),
        mode=mode,
        granularity=granularity,
        threshold=threshold,
        cap=cap,
    )
