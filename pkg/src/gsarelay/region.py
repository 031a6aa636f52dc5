"""Exact rational computation of the two-pair relay-exchange DoF region.

The achievable region for antenna counts (m1, m2, m3, m4, n) is the
polytope cut out by twelve inequalities (labelled ``9a``..``9l``): four
single-user caps, four cross-pair caps against the relay, and four
triple-sum caps.  All region arithmetic is done with ``fractions.Fraction``
so membership and tightness tests are exact; optima such as 40/3 come out
as true rationals rather than floats.

Two independent routes to the optimal sum DoF are provided:

* :func:`sum_dof_closed_form` evaluates the per-regime minimum formulas and
  attaches an achieving vertex from the corresponding vertex table.
* :func:`sum_dof_oracle` enumerates every vertex candidate of the polytope
  (all 4-subsets of the 12 facets plus the 4 nonnegativity planes, 1820
  linear systems) and maximizes the component sum exactly.

The two must agree everywhere; the test suite sweeps a large grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from numbers import Rational
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import InvalidConfig, InvalidTuple

__all__ = [
    "AntennaConfig",
    "UserPermutation",
    "DoFTuple",
    "RegionConstraint",
    "Regime",
    "SumDofResult",
    "FACET_LABELS",
    "canonicalize",
    "region_constraints",
    "in_region",
    "symmetrize",
    "regime_of",
    "sum_dof_closed_form",
    "sum_dof_oracle",
    "optimal_vertices",
    "canonical_configs",
]

#: Facet labels in fixed order; index i pairs with _FACET_COEFFS[i].
FACET_LABELS = (
    "9a", "9b", "9c", "9d",
    "9e", "9f", "9g", "9h",
    "9i", "9j", "9k", "9l",
)

_FACET_COEFFS = (
    (1, 0, 0, 0),
    (0, 1, 0, 0),
    (0, 0, 1, 0),
    (0, 0, 0, 1),
    (1, 0, 1, 0),
    (1, 0, 0, 1),
    (0, 1, 1, 0),
    (0, 1, 0, 1),
    (1, 1, 1, 0),
    (1, 1, 0, 1),
    (1, 0, 1, 1),
    (0, 1, 1, 1),
)


def _as_rational(value, *, what: str = "value") -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (Rational, str)):
        raise InvalidTuple(
            f"{what} must be an int, Fraction, or 'p/q' string, got {value!r}"
        )
    return Fraction(value)


@dataclass(frozen=True)
class AntennaConfig:
    """Antenna counts: four users (m1..m4) plus the relay (n)."""

    m1: int
    m2: int
    m3: int
    m4: int
    n: int

    def __post_init__(self) -> None:
        for name in ("m1", "m2", "m3", "m4", "n"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise InvalidConfig(f"{name} must be an integer, got {value!r}")
            if value < 1:
                raise InvalidConfig(f"{name} must be >= 1, got {value}")
            object.__setattr__(self, name, int(value))

    @property
    def users(self) -> tuple[int, int, int, int]:
        return (self.m1, self.m2, self.m3, self.m4)

    @property
    def is_canonical(self) -> bool:
        """True when m1 >= m2, m3 >= m4 and pair (1,2) has the larger sum."""
        return (
            self.m1 >= self.m2
            and self.m3 >= self.m4
            and self.m1 + self.m2 >= self.m3 + self.m4
        )

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.m1, self.m2, self.m3, self.m4, self.n)


@dataclass(frozen=True)
class UserPermutation:
    """Relabelling that maps a raw configuration to canonical order.

    The three flags record the operations applied, in order: swap within raw
    pair (1,2), swap within raw pair (3,4), then exchange the two pairs.
    Each flag on its own is an involution; their composition is not always
    one (pair exchange combined with a single within-pair swap is a
    4-cycle), so conversions go through the explicit slot order below.
    """

    within_pair_swap_12: bool = False
    within_pair_swap_34: bool = False
    pair_swap: bool = False

    @property
    def order(self) -> tuple[int, int, int, int]:
        """Raw user index (0-based) occupying each canonical slot."""
        order = [0, 1, 2, 3]
        if self.within_pair_swap_12:
            order[0], order[1] = order[1], order[0]
        if self.within_pair_swap_34:
            order[2], order[3] = order[3], order[2]
        if self.pair_swap:
            order = order[2:] + order[:2]
        return tuple(order)

    @property
    def is_identity(self) -> bool:
        return self.order == (0, 1, 2, 3)

    def to_canonical(self, values: Sequence) -> tuple:
        """Reorder a raw-indexed 4-sequence into canonical slot order."""
        if len(values) != 4:
            raise ValueError("expected a 4-sequence")
        return tuple(values[i] for i in self.order)

    def to_raw(self, values: Sequence) -> tuple:
        """Reorder a canonical-slot 4-sequence back to raw user order."""
        if len(values) != 4:
            raise ValueError("expected a 4-sequence")
        out: list = [None] * 4
        for slot, raw_index in enumerate(self.order):
            out[raw_index] = values[slot]
        return tuple(out)


def canonicalize(raw: AntennaConfig) -> tuple[AntennaConfig, UserPermutation]:
    """Reorder users so m1 >= m2, m3 >= m4, m1+m2 >= m3+m4.

    Returns the canonical configuration and the permutation that produced
    it; ``perm.to_raw`` maps any canonical-slot 4-tuple (DoF values,
    per-user results) back to raw user order.
    """
    if not isinstance(raw, AntennaConfig):
        raw = AntennaConfig(*raw)
    perm = UserPermutation(
        within_pair_swap_12=raw.m1 < raw.m2,
        within_pair_swap_34=raw.m3 < raw.m4,
        pair_swap=max(raw.m1, raw.m2) + min(raw.m1, raw.m2)
        < max(raw.m3, raw.m4) + min(raw.m3, raw.m4),
    )
    users = perm.to_canonical(raw.users)
    return AntennaConfig(*users, raw.n), perm


def _require_canonical(cfg: AntennaConfig) -> AntennaConfig:
    if not isinstance(cfg, AntennaConfig):
        cfg = AntennaConfig(*cfg)
    if not cfg.is_canonical:
        raise InvalidConfig(
            f"configuration {cfg.as_tuple()} is not canonical; "
            "call canonicalize() first"
        )
    return cfg


class DoFTuple:
    """Nonnegative rational stream counts (d1, d2, d3, d4).

    Components accept ints, Fractions, or 'p/q' strings; floats are
    rejected to keep all region arithmetic exact.
    """

    __slots__ = ("_d",)

    def __init__(self, d1, d2, d3, d4):
        values = tuple(_as_rational(v, what="DoF component") for v in (d1, d2, d3, d4))
        for v in values:
            if v < 0:
                raise InvalidTuple(f"DoF components must be >= 0, got {v}")
        object.__setattr__(self, "_d", values)

    @classmethod
    def of(cls, values: Iterable) -> "DoFTuple":
        if isinstance(values, DoFTuple):
            return values
        vals = tuple(values)
        if len(vals) != 4:
            raise InvalidTuple(f"expected 4 components, got {len(vals)}")
        return cls(*vals)

    @property
    def d1(self) -> Fraction:
        return self._d[0]

    @property
    def d2(self) -> Fraction:
        return self._d[1]

    @property
    def d3(self) -> Fraction:
        return self._d[2]

    @property
    def d4(self) -> Fraction:
        return self._d[3]

    @property
    def total(self) -> Fraction:
        return sum(self._d, Fraction(0))

    @property
    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self._d)

    def as_tuple(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return self._d

    def as_ints(self) -> tuple[int, int, int, int]:
        if not self.is_integral:
            raise InvalidTuple(f"{self} is not integral")
        return tuple(int(v) for v in self._d)

    def scaled(self, factor) -> "DoFTuple":
        f = _as_rational(factor, what="scale factor")
        return DoFTuple(*(v * f for v in self._d))

    def __iter__(self):
        return iter(self._d)

    def __getitem__(self, index):
        return self._d[index]

    def __len__(self) -> int:
        return 4

    def __eq__(self, other) -> bool:
        if isinstance(other, DoFTuple):
            return self._d == other._d
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._d)

    def __repr__(self) -> str:
        return "DoFTuple({}, {}, {}, {})".format(*self._d)


@dataclass(frozen=True)
class RegionConstraint:
    """One facet inequality ``sum(coeffs * d) <= rhs``."""

    coeffs: tuple[int, int, int, int]
    rhs: Fraction
    label: str

    def value(self, d: DoFTuple) -> Fraction:
        return sum((c * v for c, v in zip(self.coeffs, d)), Fraction(0))

    def satisfied(self, d: DoFTuple) -> bool:
        return self.value(d) <= self.rhs

    def is_tight(self, d: DoFTuple) -> bool:
        return self.value(d) == self.rhs

    def render(self) -> str:
        terms = "+".join(f"d{i + 1}" for i, c in enumerate(self.coeffs) if c)
        return f"{terms} <= {self.rhs}"


def region_constraints(cfg: AntennaConfig) -> list[RegionConstraint]:
    """The twelve facet inequalities of the region for a canonical config."""
    cfg = _require_canonical(cfg)
    t12 = max(cfg.m1 + cfg.m2, cfg.n)
    t34 = max(cfg.m3 + cfg.m4, cfg.n)
    rhs = (
        cfg.m2, cfg.m2, cfg.m4, cfg.m4,
        cfg.n, cfg.n, cfg.n, cfg.n,
        t12, t12, t34, t34,
    )
    return [
        RegionConstraint(coeffs=c, rhs=Fraction(r), label=label)
        for c, r, label in zip(_FACET_COEFFS, rhs, FACET_LABELS)
    ]


def in_region(cfg: AntennaConfig, d) -> bool:
    """Exact membership test of *d* against all twelve facets."""
    tup = DoFTuple.of(d)
    return all(c.satisfied(tup) for c in region_constraints(cfg))


def symmetrize(d) -> DoFTuple:
    """Average each pair: (d1,d2,d3,d4) -> (s,s,t,t) with the same sum."""
    tup = DoFTuple.of(d)
    s = (tup.d1 + tup.d2) / 2
    t = (tup.d3 + tup.d4) / 2
    return DoFTuple(s, s, t, t)


class Regime(Enum):
    """Relay-size regime selecting the closed-form expression set."""

    LARGE_RELAY = 1   # n >= m1+m2
    MID_RELAY = 2     # m3+m4 <= n < m1+m2
    SMALL_RELAY = 3   # n < m3+m4

    @property
    def condition(self) -> str:
        return {
            Regime.LARGE_RELAY: "N >= M1+M2",
            Regime.MID_RELAY: "M3+M4 <= N < M1+M2",
            Regime.SMALL_RELAY: "N < M3+M4",
        }[self]


def regime_of(cfg: AntennaConfig) -> Regime:
    cfg = _require_canonical(cfg)
    if cfg.n >= cfg.m1 + cfg.m2:
        return Regime.LARGE_RELAY
    if cfg.n >= cfg.m3 + cfg.m4:
        return Regime.MID_RELAY
    return Regime.SMALL_RELAY


@dataclass(frozen=True)
class SumDofResult:
    """Optimal sum DoF with an achieving vertex and tightness certificate."""

    value: Fraction
    vertex: DoFTuple
    active_labels: frozenset[str]
    regime: Regime


def _relay_cap_vertices(cfg: AntennaConfig) -> list[tuple[Fraction, Fraction]]:
    """(d2, d4) points with d2+d4 = n achieving sum 2n in the small-relay
    regime.

    Any point of the segment {(a, n-a)} that respects the single-user caps
    and both triple caps works; the admissible range for ``a`` is

        max(0, n-m4, 2n-m3-m4) <= a <= min(m2, n, m1+m2-n)

    which is nonempty exactly when 2n is the regime minimum.  When the relay
    sits exactly at a boundary (for instance n = m2+m4) the interval
    collapses to the single classical vertex; strictly inside, the interval
    endpoints correspond to deactivating antennas at different users until
    the boundary is met.  Both endpoints are returned.
    """
    n = cfg.n
    hi = min(cfg.m2, n, cfg.m1 + cfg.m2 - n)
    lo = max(0, n - cfg.m4, 2 * n - cfg.m3 - cfg.m4)
    if lo > hi:
        return []
    points = [(Fraction(hi), Fraction(n - hi))]
    if lo != hi:
        points.append((Fraction(lo), Fraction(n - lo)))
    return points


def _achievability_rows(
    cfg: AntennaConfig, regime: Regime
) -> list[tuple[Fraction, list[tuple[Fraction, Fraction]]]]:
    """(expression, candidate (d2, d4) vertices) rows for the regime.

    Vertices lift to 4 dimensions as (d2, d2, d4, d4): restricting to
    symmetric pair exchange loses no sum DoF, so the search lives in the
    (d2, d4) plane.
    """
    m1, m2, m3, m4, n = cfg.as_tuple()
    F = Fraction
    if regime is Regime.LARGE_RELAY:
        return [
            (F(2 * m2 + 2 * m4), [(F(m2), F(m4))]),
            (F(4 * n, 3), [(F(n, 3), F(n, 3))]),
            (F(m2 + n), [(F(m2), F(n - m2, 2))]),
            (F(m4 + n), [(F(n - m4, 2), F(m4))]),
        ]
    if regime is Regime.MID_RELAY:
        return [
            (F(2 * m2 + 2 * m4), [(F(m2), F(m4))]),
            (F(m2 + n), [(F(m2), F(n - m2, 2))]),
            (F(m1 + m2 + m4), [(F(m1 + m2 - m4, 2), F(m4))]),
            (F(2 * n), [(F(n), F(0))]),
            (F(2 * (m1 + m2 + n), 3), [(F(2 * m1 + 2 * m2 - n, 3), F(2 * n - m1 - m2, 3))]),
        ]
    return [
        (F(2 * m2 + 2 * m4), [(F(m2), F(m4))]),
        (F(2 * n), _relay_cap_vertices(cfg)),
        (F(m2 + m3 + m4), [(F(m2), F(m3 + m4 - m2, 2))]),
        (F(m1 + m2 + m4), [(F(m1 + m2 - m4, 2), F(m4))]),
        (
            F(2 * (m1 + m2 + m3 + m4), 3),
            [(F(2 * m1 + 2 * m2 - m3 - m4, 3), F(2 * m3 + 2 * m4 - m1 - m2, 3))],
        ),
    ]


def _achieving_vertices(cfg: AntennaConfig) -> tuple[Fraction, list[DoFTuple], Regime]:
    regime = regime_of(cfg)
    rows = _achievability_rows(cfg, regime)
    best = min(expr for expr, _ in rows)
    vertices: list[DoFTuple] = []
    for expr, candidates in rows:
        if expr != best:
            continue
        for d2, d4 in candidates:
            if d2 < 0 or d4 < 0:
                continue
            vertex = DoFTuple(d2, d2, d4, d4)
            if vertex.total == best and in_region(cfg, vertex) and vertex not in vertices:
                vertices.append(vertex)
    if not vertices:
        raise AssertionError(
            f"no feasible achieving vertex for {cfg.as_tuple()}; "
            "vertex tables are inconsistent"
        )
    return best, vertices, regime


def sum_dof_closed_form(cfg: AntennaConfig) -> SumDofResult:
    """Closed-form optimal sum DoF with one achieving vertex.

    The regime is selected by comparing n against m1+m2 and m3+m4 and the
    corresponding minimum evaluated exactly.
    """
    cfg = _require_canonical(cfg)
    value, vertices, regime = _achieving_vertices(cfg)
    vertex = vertices[0]
    active = frozenset(
        c.label for c in region_constraints(cfg) if c.is_tight(vertex)
    )
    return SumDofResult(value=value, vertex=vertex, active_labels=active, regime=regime)


def optimal_vertices(cfg: AntennaConfig) -> list[DoFTuple]:
    """All table vertices that achieve the closed-form optimum.

    Returned as full 4-tuples (d2, d2, d4, d4); every element satisfies
    :func:`in_region` and sums to ``sum_dof_closed_form(cfg).value``.
    """
    cfg = _require_canonical(cfg)
    _, vertices, _ = _achieving_vertices(cfg)
    return vertices


# --- brute-force vertex-enumeration oracle ---------------------------------

def _int_det3(m) -> int:
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def _minor3(m, drop_row: int, drop_col: int):
    return [
        [m[r][c] for c in range(4) if c != drop_col]
        for r in range(4) if r != drop_row
    ]


def _int_det4(m) -> int:
    det = 0
    for c in range(4):
        if m[0][c] == 0:
            continue
        det += (-1) ** c * m[0][c] * _int_det3(_minor3(m, 0, c))
    return det


def _int_adjugate4(m) -> list[list[int]]:
    # adj[i][j] = cofactor_{j,i}, so that m @ adj == det * I.
    adj = [[0] * 4 for _ in range(4)]
    for r in range(4):
        for c in range(4):
            adj[c][r] = (-1) ** (r + c) * _int_det3(_minor3(m, r, c))
    return adj


@lru_cache(maxsize=1)
def _vertex_solvers() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Precomputed exact solvers for every nonsingular 4-subset of the 16
    candidate hyperplanes (12 facets + 4 nonnegativity planes d_i = 0).

    For subset k with coefficient matrix A_k the solution of A_k d = b is
    d = (adj_k @ b) / det_k with integer adjugate and determinant, det_k
    normalized positive.  Returns (subset index rows, adjugates, dets).
    """
    normals = [list(c) for c in _FACET_COEFFS]
    for i in range(4):
        row = [0, 0, 0, 0]
        row[i] = 1
        normals.append(row)
    subsets, adjugates, dets = [], [], []
    for combo in combinations(range(16), 4):
        a = [normals[i] for i in combo]
        det = _int_det4(a)
        if det == 0:
            continue
        adj = _int_adjugate4(a)
        if det < 0:
            det = -det
            adj = [[-x for x in row] for row in adj]
        subsets.append(combo)
        adjugates.append(adj)
        dets.append(det)
    return (
        np.array(subsets, dtype=np.int64),
        np.array(adjugates, dtype=np.int64),
        np.array(dets, dtype=np.int64),
    )


def sum_dof_oracle(cfg: AntennaConfig) -> SumDofResult:
    """Exact optimum by complete vertex enumeration of the region polytope.

    Every choice of 4 hyperplanes out of the 12 facets plus the 4 planes
    d_i = 0 yields a candidate vertex when the 4x4 system is nonsingular
    (1820 subsets; the 495 facet-only choices are a strict subset).
    Candidates are kept when nonnegative and feasible for all facets, and
    the component sum is maximized.  All arithmetic is integer (solutions
    are held as numerator vectors over the subset determinant, which for
    these 0/1 normal matrices is at most 3), so the result is exact.
    """
    cfg = _require_canonical(cfg)
    constraints = region_constraints(cfg)
    rhs12 = np.array([int(c.rhs) for c in constraints], dtype=np.int64)
    # Magnitude guard for the int64 fast path: numerators are bounded by
    # 4 * max|adj| * max(rhs) with |adj| <= 2 for 0/1 normals.
    if rhs12.max(initial=0) >= 2**40:
        raise InvalidConfig("antenna counts too large for exact enumeration")
    rhs16 = np.concatenate([rhs12, np.zeros(4, dtype=np.int64)])
    subsets, adjugates, dets = _vertex_solvers()

    b = rhs16[subsets]                                   # (K, 4)
    nums = np.einsum("kij,kj->ki", adjugates, b)         # d = nums / dets
    coeffs = np.array(_FACET_COEFFS, dtype=np.int64)     # (12, 4)
    feasible = (nums >= 0).all(axis=1) & (
        nums @ coeffs.T <= rhs12[None, :] * dets[:, None]
    ).all(axis=1)

    scale = int(np.lcm.reduce(np.unique(dets)))
    scores = nums.sum(axis=1) * (scale // dets)
    scores[~feasible] = -1
    k = int(np.argmax(scores))

    den = int(dets[k])
    vertex = DoFTuple.of([Fraction(int(v), den) for v in nums[k]])
    active = frozenset(c.label for c in constraints if c.is_tight(vertex))
    return SumDofResult(
        value=vertex.total,
        vertex=vertex,
        active_labels=active,
        regime=regime_of(cfg),
    )


def canonical_configs(m_max: int, n_max: int) -> Iterator[AntennaConfig]:
    """All canonical configs with user antennas in 1..m_max, relay 1..n_max.

    Deterministic lexicographic order over (m1, m2, m3, m4, n).
    """
    for m1 in range(1, m_max + 1):
        for m2 in range(1, m1 + 1):
            for m3 in range(1, m_max + 1):
                for m4 in range(1, m3 + 1):
                    if m1 + m2 < m3 + m4:
                        continue
                    for n in range(1, n_max + 1):
                        yield AntennaConfig(m1, m2, m3, m4, n)
