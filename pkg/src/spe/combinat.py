"""Set-partition counting and enumeration over scoped variable pools.

Fillings of a hole family that differ only by renaming variables within a
pool correspond to the same set partition of the family's holes, so streams
here are restricted growth strings (RGS): digit strings ``a`` with
``a[0] == 0`` and ``a[i] <= 1 + max(a[:i])``, one digit per hole, equal
digits meaning "same variable".  Every stream is emitted in lexicographic
order and is duplicate-free.

Two enumeration modes exist for scoped families:

* COMPLETE: every hole independently picks one pool on its scope path
  (its configuration), then each pool's holes are partitioned into at most
  as many blocks as the pool has variables.  Sound and complete for
  within-pool renaming equivalence, and it handles nested pools.
* PAPER: the historical procedure this tool reproduces.  It requires a
  flat pool tree (every local pool directly under the root), partitions
  the root pool into *exactly* ``len(root.vars)`` blocks for any mixed
  configuration, and never promotes all holes of one local scope unless it
  promotes every hole of every scope.  Its stream is a strict subset of
  COMPLETE's on some shapes (see ``tests``), which is why COMPLETE is the
  default elsewhere.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence, TYPE_CHECKING

if TYPE_CHECKING:  # pragma: no cover - import cycle guard, typing only
    from .skeleton import NormalForm

__all__ = [
    "Mode",
    "ScopeNestingError",
    "stirling2",
    "count_at_most",
    "count_exact",
    "rgs_at_most",
    "rgs_exact",
    "rgs_of_vector",
    "blocks_of_rgs",
    "partitions_at_most",
    "partitions_exact",
    "combinations",
    "Pool",
    "Family",
    "FamilyPartition",
    "ScopedPartition",
    "partition_scope",
    "family_count",
    "scoped_count",
    "lazy_product",
    "UnitCounts",
    "CountReport",
    "count_plan",
]


class Mode(enum.Enum):
    PAPER = "paper"
    COMPLETE = "complete"


class ScopeNestingError(ValueError):
    """PAPER mode asked to partition a family whose pool tree is not flat."""


# ---------------------------------------------------------------------------
# Stirling numbers of the second kind

_stirling_rows: list[list[int]] = [[1]]  # row n maps k -> {n, k}; {0,0} = 1


def stirling2(n: int, k: int) -> int:
    """{n, k}: partitions of an n-set into exactly k non-empty blocks.

    Conventions: {0,0} = 1, {n,0} = 0 for n > 0, and {n,k} = 0 for k > n.
    """
    if n < 0 or k < 0 or k > n:
        return 0
    while len(_stirling_rows) <= n:
        m = len(_stirling_rows)
        prev = _stirling_rows[m - 1]
        row = [0] * (m + 1)
        for j in range(1, m + 1):
            row[j] = prev[j - 1] + (j * prev[j] if j < m else 0)
        _stirling_rows.append(row)
    return _stirling_rows[n][k]


def count_exact(n: int, k: int) -> int:
    return stirling2(n, k)


def count_at_most(n: int, k: int) -> int:
    """Partitions of an n-set into at most k blocks (1 for n == 0)."""
    if n == 0:
        return 1
    return sum(stirling2(n, i) for i in range(1, min(k, n) + 1))


# ---------------------------------------------------------------------------
# Restricted growth strings


def rgs_at_most(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """All RGS of length n with fewer than k distinct digits allowed... at
    most k blocks, lexicographic.  n == 0 yields the single empty string."""
    if n == 0:
        yield ()
        return
    if k < 1:
        return
    a = [0] * n
    b = [1] * n  # b[i] = 1 + max(a[:i]); a[i] may grow up to min(b[i], k-1)
    while True:
        yield tuple(a)
        i = n - 1
        while i > 0 and a[i] + 1 > min(b[i], k - 1):
            i -= 1
        if i == 0:
            return
        a[i] += 1
        for j in range(i + 1, n):
            a[j] = 0
            b[j] = max(b[j - 1], a[j - 1] + 1)


def rgs_exact(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """All RGS of length n using exactly k distinct digits, lexicographic.

    Empty for k > n (no {n,n} fallback; the at-most routine owns the cap)."""
    if k < 0 or k > n:
        return
    if n == 0:
        yield ()
        return
    a = [0] * n

    def rec(i: int, used: int) -> Iterator[tuple[int, ...]]:
        if i == n:
            if used == k:
                yield tuple(a)
            return
        hi = min(used, k - 1)
        for d in range(hi + 1):
            nu = used + (1 if d == used else 0)
            # enough positions left to open the remaining blocks
            if nu + (n - i - 1) >= k:
                a[i] = d
                yield from rec(i + 1, nu)

    yield from rec(0, 0)


def rgs_of_vector(values: Sequence) -> tuple[int, ...]:
    """RGS of any vector: digit = index of the value's first occurrence."""
    seen: dict = {}
    out = []
    for v in values:
        if v not in seen:
            seen[v] = len(seen)
        out.append(seen[v])
    return tuple(out)


def blocks_of_rgs(rgs: Sequence[int]) -> tuple[tuple[int, ...], ...]:
    """Positions grouped by digit, blocks in first-occurrence order."""
    nblocks = max(rgs) + 1 if rgs else 0
    blocks: list[list[int]] = [[] for _ in range(nblocks)]
    for pos, d in enumerate(rgs):
        blocks[d].append(pos)
    return tuple(tuple(b) for b in blocks)


def partitions_at_most(elems: Sequence, k: int) -> Iterator[tuple[int, ...]]:
    """RGS stream over ``elems`` (positional), at most k blocks."""
    return rgs_at_most(len(elems), k)


def partitions_exact(elems: Sequence, k: int) -> Iterator[tuple[int, ...]]:
    """RGS stream over ``elems`` (positional), exactly k blocks."""
    return rgs_exact(len(elems), k)


def combinations(elems: Sequence, k: int) -> Iterator[tuple]:
    """k-subsets of elems in lexicographic (input-order) order."""
    return itertools.combinations(elems, k)


def lazy_product(factories: Sequence[Callable[[], Iterable]]) -> Iterator[tuple]:
    """Row-major Cartesian product of restartable streams.

    Unlike itertools.product this never materializes a factor, so a capped
    consumer of a huge product stays O(1) in memory.  Each factory must
    return a fresh iterator per call.
    """
    n = len(factories)

    def rec(i: int) -> Iterator[tuple]:
        if i == n:
            yield ()
            return
        for head in factories[i]():
            for rest in rec(i + 1):
                yield (head,) + rest

    return rec(0)


# ---------------------------------------------------------------------------
# Scoped families


@dataclass(frozen=True)
class Pool:
    """One variable pool: a scope's same-type variables, declaration order.

    ``parent`` is the index (within the family) of the nearest enclosing
    pool that exists in the family, None for the root.  The root pool is
    always index 0 and is the only pool allowed to be empty.
    """

    scope: int
    vars: tuple
    parent: int | None


@dataclass(frozen=True)
class Family:
    """The partition problem for one (unit, type) hole family.

    ``holes`` are hole indices in normal-form order: root-pool holes first,
    then each local pool's holes, source order within a pool.  ``eligible``
    gives, per hole position, the ascending pool indices the hole may draw
    from (the non-empty pools on its scope path; the root appears iff the
    root pool is non-empty).
    """

    type: str
    pools: tuple[Pool, ...]
    holes: tuple[int, ...]
    eligible: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        assert self.pools and self.pools[0].parent is None
        assert len(self.holes) == len(self.eligible)
        for el in self.eligible:
            assert el, "a hole with no eligible pool cannot be filled"

    @property
    def is_flat(self) -> bool:
        return all(p.parent == 0 for p in self.pools[1:])

    def deepest(self, pos: int) -> int:
        return self.eligible[pos][-1]


@dataclass(frozen=True)
class FamilyPartition:
    """One scoped partition of a single family.

    ``config`` assigns each hole (normal-form order) a pool index; ``rgs``
    holds, per pool, the RGS over the holes that chose it (again in
    normal-form order).  Root-pool data sits first.  The pair is a full
    canonical form: two fillings are within-pool-renaming equivalent iff
    their FamilyPartitions are equal.
    """

    type: str
    config: tuple[int, ...]
    rgs: tuple[tuple[int, ...], ...]

    @property
    def key(self) -> tuple:
        return (self.config, self.rgs)


@dataclass(frozen=True)
class ScopedPartition:
    """Product of FamilyPartitions, one per family of a normal form."""

    parts: tuple[FamilyPartition, ...]

    @property
    def key(self) -> tuple:
        return tuple(p.key for p in self.parts)


def _pool_positions(family: Family, config: Sequence[int]) -> list[list[int]]:
    per_pool: list[list[int]] = [[] for _ in family.pools]
    for pos, pi in enumerate(config):
        per_pool[pi].append(pos)
    return per_pool


def _paper_config_ok(family: Family, config: Sequence[int]) -> bool:
    # All-promoted is covered by the at-most solution over every hole;
    # any other configuration must keep >= 1 hole in each local family.
    if all(d == 0 for d in config):
        return True
    for p in range(1, len(family.pools)):
        holes_of_p = [pos for pos in range(len(config)) if family.deepest(pos) == p]
        if holes_of_p and not any(config[pos] == p for pos in holes_of_p):
            return False
    return True


def _family_stream(family: Family, mode: Mode) -> Iterator[FamilyPartition]:
    if mode is Mode.PAPER and not family.is_flat:
        raise ScopeNestingError(
            "paper mode handles one level of local pools under the root; "
            "this family nests pools"
        )
    for config in lazy_product([lambda el=el: iter(el) for el in family.eligible]):
        if mode is Mode.PAPER and not _paper_config_ok(family, config):
            continue
        per_pool = _pool_positions(family, config)
        all_root = all(d == 0 for d in config)

        def pool_factory(pi: int, positions: list[int]):
            cap = len(family.pools[pi].vars)
            if mode is Mode.PAPER and pi == 0 and not all_root:
                return lambda: rgs_exact(len(positions), cap)
            return lambda: rgs_at_most(len(positions), cap)

        factories = [pool_factory(pi, pos) for pi, pos in enumerate(per_pool)]
        for rgs_tuple in lazy_product(factories):
            yield FamilyPartition(type=family.type, config=config, rgs=rgs_tuple)


def family_count(family: Family, mode: Mode) -> int:
    """Closed-form size of _family_stream without enumerating it."""
    if mode is Mode.PAPER:
        return _paper_count(family)
    return _complete_count(family)


def _binom(n: int, k: int) -> int:
    import math

    return math.comb(n, k)


def _complete_count(family: Family) -> int:
    # Bottom-up over the pool tree.  up[p][j] = ways to place and partition
    # every hole of p's subtree such that exactly j holes pass above p.
    npools = len(family.pools)
    own = [0] * npools
    for pos in range(len(family.holes)):
        own[family.deepest(pos)] += 1
    kids: list[list[int]] = [[] for _ in range(npools)]
    for i, p in enumerate(family.pools):
        if p.parent is not None:
            kids[p.parent].append(i)

    up: dict[int, list[int]] = {}
    for p in range(npools - 1, -1, -1):
        arrived = [1]  # index: holes passed into p from children
        for c in kids[p]:
            child = up[c]
            merged = [0] * (len(arrived) + len(child) - 1)
            for i, a in enumerate(arrived):
                if a:
                    for j, b in enumerate(child):
                        merged[i + j] += a * b
            arrived = merged
        v = len(family.pools[p].vars)
        total_in = [0] * (len(arrived) + own[p])
        for j, w in enumerate(arrived):
            if w:
                total_in[j + own[p]] += w
        if p == 0:
            return sum(w * count_at_most(a, v) for a, w in enumerate(total_in))
        out = [0] * len(total_in)
        for a, w in enumerate(total_in):
            if not w:
                continue
            for m in range(a + 1):  # m holes stop at p, a-m continue up
                out[a - m] += w * _binom(a, m) * count_at_most(m, v)
        up[p] = out
    raise AssertionError("unreachable: family has a root pool")


def _paper_count(family: Family) -> int:
    if not family.is_flat:
        raise ScopeNestingError(
            "paper mode handles one level of local pools under the root; "
            "this family nests pools"
        )
    n = len(family.holes)
    v_root = len(family.pools[0].vars)
    fams: dict[int, int] = {}
    for pos in range(n):
        d = family.deepest(pos)
        if d != 0:
            fams[d] = fams.get(d, 0) + 1
    g = n - sum(fams.values())
    # all promoted, at-most blocks -- only when every hole may reach the root
    total = count_at_most(n, v_root) if all(0 in el for el in family.eligible) else 0
    locals_ = sorted(fams.items())
    if not locals_:
        # no local pools: the procedure degenerates to the at-most solution
        return total
    # every local family keeps m_i in [1, u_i]; promoted holes join the root,
    # which is then partitioned into exactly v_root blocks
    for kept in itertools.product(*[range(1, u + 1) for _, u in locals_]):
        ways = 1
        promoted = 0
        for (p, u), m in zip(locals_, kept):
            if 0 not in family.eligible[_first_of(family, p)] and m != u:
                ways = 0
                break
            ways *= _binom(u, m) * count_at_most(m, len(family.pools[p].vars))
            promoted += u - m
        if ways:
            total += ways * stirling2(g + promoted, v_root)
    return total


def _first_of(family: Family, pool: int) -> int:
    for pos in range(len(family.holes)):
        if family.deepest(pos) == pool:
            return pos
    raise ValueError(f"no hole with deepest pool {pool}")


# ---------------------------------------------------------------------------
# Normal-form level API


def partition_scope(nf: "NormalForm", mode: Mode) -> Iterator[ScopedPartition]:
    """Stream every scoped partition of a normal form, one ScopedPartition
    covering all of its families, lexicographic in the canonical key and
    duplicate-free.  PAPER mode raises ScopeNestingError on non-flat forms."""
    factories = [
        (lambda fam=fam: _family_stream(fam, mode)) for fam in nf.families
    ]
    for parts in lazy_product(factories):
        yield ScopedPartition(parts=parts)


def scoped_count(nf: "NormalForm", mode: Mode) -> int:
    total = 1
    for fam in nf.families:
        total *= family_count(fam, mode)
    return total


# ---------------------------------------------------------------------------
# Skeleton-level counting


@dataclass(frozen=True)
class UnitCounts:
    """Counts for one enumeration unit (a function, the global-decl
    pseudo-unit, or the whole program at inter granularity)."""

    unit: str
    n: int
    naive: int
    paper: int | None  # None when PAPER mode rejects the unit's nesting
    complete: int


@dataclass(frozen=True)
class CountReport:
    """Arithmetic-only size report for a skeleton; no enumeration happens.

    naive_count multiplies each hole's variable-set size; the mode counts
    multiply per-unit partition counts (the intra-procedural product, or
    the single program-wide problem at inter granularity).
    scope_blind_count ignores scoping entirely: every hole may take any
    same-type variable of the program, which is the figure enumeration is
    usually compared against.
    """

    naive_count: int
    paper_mode_count: int | None
    complete_mode_count: int
    scope_blind_count: int
    granularity: str  # "intra" | "inter"
    per_function: tuple[UnitCounts, ...]


def count_plan(skel, granularity=None) -> CountReport:
    """Count a skeleton's naive and deduplicated enumeration sizes.

    Big-integer exact; cost is polynomial in the skeleton size, never in
    the counts themselves.
    """
    from .skeleton import Granularity, normal_forms

    if granularity is None:
        granularity = Granularity.INTRA

    rows = []
    paper_total: int | None = 1
    complete_total = 1
    for nf in normal_forms(skel, granularity):
        unit_naive = 1
        for index in nf.permutation:
            unit_naive *= len(skel.hole(index).var_set)
        complete = scoped_count(nf, Mode.COMPLETE)
        try:
            paper: int | None = scoped_count(nf, Mode.PAPER)
        except ScopeNestingError:
            paper = None
        rows.append(
            UnitCounts(
                unit=nf.unit,
                n=len(nf.permutation),
                naive=unit_naive,
                paper=paper,
                complete=complete,
            )
        )
        complete_total *= complete
        paper_total = None if (paper is None or paper_total is None) else paper_total * paper

    naive_total = 1
    for h in skel.holes:
        naive_total *= len(h.var_set)

    per_type: dict[str, int] = {}
    for node in skel.program.scopes.nodes.values():
        for d in node.decls:
            per_type[d.type] = per_type.get(d.type, 0) + 1
    scope_blind = 1
    for h in skel.holes:
        scope_blind *= per_type.get(h.type, 0)

    return CountReport(
        naive_count=naive_total,
        paper_mode_count=paper_total,
        complete_mode_count=complete_total,
        scope_blind_count=scope_blind,
        granularity=granularity.value,
        per_function=tuple(rows),
    )
