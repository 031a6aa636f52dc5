"""Constructive transceiver synthesis via generalized signal alignment.

Given a canonical antenna configuration, an integer DoF tuple inside the
region, and a channel realization, this module builds the complete two-phase
design:

* uplink: a full-row-rank compression matrix ``P`` (J x N_eff with
  J = max(d1,d2) + max(d3,d4)), pair precoders ``V_i`` aligning each pair's
  exchanged streams in a common compressed subspace, random completion
  precoders for the surplus one-way streams, and the J x J zero-forcer ``W``
  that separates network-coded sums from one-way streams;
* downlink: the mirror-image design (``Q``, receive filters ``U_i``, and the
  zero-forcer ``T``) obtained by running the same construction on the
  transposed downlink channels with the pair roles swapped.

How many rows of ``P`` must live in the left null space of the stacked pair
channel ``[H_i  -H_j]`` follows the alignment feasibility count: pair (i, j)
with aligned stream count ``s = min(d_i, d_j)`` needs
``max(0, J - M_i - M_j + s)`` such rows, which is also exactly what
:func:`check_gsa_feasibility` reports.

Antenna deactivation policy (per relay-size regime, applied symmetrically to
both phases; deactivated antennas are the trailing ones, i.e. trailing
channel columns/rows are dropped):

* large relay (n >= m1+m2): both pairs shrink to their smaller member
  (m1 -> m2, m3 -> m4);
* mid relay (m3+m4 <= n < m1+m2): pair (1,2) keeps all antennas - its
  triple bound is m1+m2, so shrinking it can destroy feasibility - while
  pair (3,4) shrinks to m4;
* small relay (n < m3+m4): users keep all antennas, the relay uses only
  J of its n.

Within each pair the construction assumes the first member sends at least
as many streams as the second; :func:`synthesize` swaps pair members as
needed and records the final oriented-slot -> raw-user mapping in the
design.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numkernel as nk
from .errors import (
    AlignmentInfeasible,
    InfeasibleTuple,
    InvalidDesign,
    NonIntegerTuple,
    SingularMatrix,
    TooManyStreams,
)
from .region import (
    AntennaConfig,
    DoFTuple,
    Regime,
    canonicalize,
    in_region,
    regime_of,
)

__all__ = [
    "ChannelSet",
    "FeasibilityReport",
    "TransceiverDesign",
    "DesignDiagnostics",
    "effective_antennas",
    "check_gsa_feasibility",
    "design_relay_compression",
    "design_pair_precoders",
    "complete_unidirectional",
    "mac_decoder",
    "design_bc",
    "synthesize",
]

_MAX_ATTEMPTS = 8


def _empty(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """One realization of all eight links.

    ``uplink[i]`` is the n x m_i matrix from user i to the relay,
    ``downlink[i]`` the m_i x n matrix from the relay to user i, both in raw
    user order.
    """

    uplink: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    downlink: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]

    def __post_init__(self) -> None:
        if len(self.uplink) != 4 or len(self.downlink) != 4:
            raise InvalidDesign("a channel set needs 4 uplink and 4 downlink matrices")
        ups = tuple(nk.as_cmatrix(h, name=f"uplink[{i}]") for i, h in enumerate(self.uplink))
        downs = tuple(
            nk.as_cmatrix(h, name=f"downlink[{i}]") for i, h in enumerate(self.downlink)
        )
        n = ups[0].shape[0]
        for i in range(4):
            if ups[i].shape[0] != n or downs[i].shape[1] != n:
                raise InvalidDesign("inconsistent relay antenna count across links")
            if downs[i].shape[0] != ups[i].shape[1]:
                raise InvalidDesign(f"user {i + 1} uplink/downlink sizes disagree")
        object.__setattr__(self, "uplink", ups)
        object.__setattr__(self, "downlink", downs)

    @property
    def n(self) -> int:
        return self.uplink[0].shape[0]

    @property
    def user_antennas(self) -> tuple[int, int, int, int]:
        return tuple(h.shape[1] for h in self.uplink)

    @classmethod
    def random(cls, cfg: AntennaConfig, seed) -> "ChannelSet":
        """Draw all links i.i.d. CN(0,1), deterministically from ``seed``."""
        if not isinstance(cfg, AntennaConfig):
            cfg = AntennaConfig(*cfg)
        rng = np.random.default_rng(seed)
        ups = tuple(nk.random_complex_gaussian(cfg.n, m, rng) for m in cfg.users)
        downs = tuple(nk.random_complex_gaussian(m, cfg.n, rng) for m in cfg.users)
        return cls(uplink=ups, downlink=downs)

    def matches(self, cfg: AntennaConfig) -> bool:
        return self.n == cfg.n and self.user_antennas == cfg.users


@dataclass(frozen=True)
class FeasibilityReport:
    """Alignment row bookkeeping for one (config, tuple) instance.

    ``required_rows[k]`` is how many rows of the compression matrix must lie
    in the left null space of pair k's stacked channel; ``null_space_dims``
    is how many such rows the channel geometry can supply.  Antenna counts
    are the post-deactivation ones, in canonical user order.
    """

    feasible: bool
    j: int
    required_rows: tuple[int, int]
    null_space_dims: tuple[int, int]
    m_eff: tuple[int, int, int, int]
    n_eff: int


def effective_antennas(
    cfg: AntennaConfig, d: DoFTuple
) -> tuple[tuple[int, int, int, int], int]:
    """Post-deactivation antenna counts (canonical user order) and relay size."""
    regime = regime_of(cfg)
    j = max(d.d1, d.d2) + max(d.d3, d.d4)
    if regime is Regime.LARGE_RELAY:
        return (cfg.m2, cfg.m2, cfg.m4, cfg.m4), cfg.n
    if regime is Regime.MID_RELAY:
        return (cfg.m1, cfg.m2, cfg.m4, cfg.m4), cfg.n
    return (cfg.m1, cfg.m2, cfg.m3, cfg.m4), int(j)


def _validated_tuple(cfg: AntennaConfig, d) -> DoFTuple:
    tup = DoFTuple.of(d)
    if not tup.is_integral:
        raise NonIntegerTuple(
            f"{tup} has fractional components; synthesis needs whole streams"
        )
    if not in_region(cfg, tup):
        raise InfeasibleTuple(f"{tup} lies outside the region of {cfg.as_tuple()}")
    return tup


def check_gsa_feasibility(
    cfg: AntennaConfig,
    d,
    n_eff: int | None = None,
    m_eff: tuple[int, int, int, int] | None = None,
) -> FeasibilityReport:
    """Alignment feasibility of an integer in-region tuple.

    With the default per-regime deactivation every in-region integer tuple
    is feasible; ``n_eff`` / ``m_eff`` overrides exist to probe alternative
    deactivations.  All counts are symmetric within a pair, so the tuple
    need not be pre-oriented.
    """
    if not isinstance(cfg, AntennaConfig):
        cfg = AntennaConfig(*cfg)
    tup = _validated_tuple(cfg, d)
    default_m, default_n = effective_antennas(cfg, tup)
    if m_eff is None:
        m_eff = default_m
    m_eff = tuple(int(m) for m in m_eff)
    n_eff = int(default_n if n_eff is None else n_eff)

    d1, d2, d3, d4 = tup.as_ints()
    j = max(d1, d2) + max(d3, d4)
    required = (
        max(0, j - m_eff[0] - m_eff[1] + min(d1, d2)),
        max(0, j - m_eff[2] - m_eff[3] + min(d3, d4)),
    )
    available = (
        max(0, n_eff - m_eff[0] - m_eff[1]),
        max(0, n_eff - m_eff[2] - m_eff[3]),
    )
    feasible = (
        j <= n_eff
        and required[0] <= available[0]
        and required[1] <= available[1]
        and required[0] + required[1] <= j
    )
    return FeasibilityReport(
        feasible=feasible,
        j=j,
        required_rows=required,
        null_space_dims=available,
        m_eff=m_eff,
        n_eff=n_eff,
    )


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _left_null_rows(h_i: np.ndarray, h_j: np.ndarray, count: int, tol: nk.Tolerance) -> np.ndarray:
    """First ``count`` orthonormal rows p with p @ [h_i  -h_j] = 0."""
    stacked = np.hstack([h_i, -h_j])
    basis = nk.null_space_basis(stacked.T, tol)  # plain transpose: p X = 0 <=> X^T p^T = 0
    if basis.shape[1] < count:
        raise AlignmentInfeasible(
            f"left null space has dimension {basis.shape[1]}, need {count} rows"
        )
    return basis[:, :count].T


def _compression_matrix(
    ups: list[np.ndarray],
    j: int,
    required: tuple[int, int],
    n_eff: int,
    rng: np.random.Generator,
    tol: nk.Tolerance,
) -> np.ndarray:
    """Assemble P: pair-(1,2) alignment rows, pair-(3,4) alignment rows,
    then random rows, with a full-row-rank check."""
    if j == 0:
        return _empty(0, n_eff)
    fixed = []
    if required[0] > 0:
        fixed.append(_left_null_rows(ups[0], ups[1], required[0], tol))
    if required[1] > 0:
        fixed.append(_left_null_rows(ups[2], ups[3], required[1], tol))
    free = j - required[0] - required[1]
    for _ in range(_MAX_ATTEMPTS):
        rows = fixed + [nk.random_complex_gaussian(free, n_eff, rng)]
        p = np.vstack(rows) if rows else _empty(0, n_eff)
        if nk.rank(p, tol) == j:
            return p
    raise SingularMatrix("could not draw a full-row-rank compression matrix")


def design_relay_compression(cfg: AntennaConfig, d, ch: ChannelSet, tol=nk.DEFAULT_TOL, seed=0) -> np.ndarray:
    """Stand-alone compression-matrix design for a canonical config.

    ``ch`` must be indexed consistently with ``cfg`` (canonical user order).
    Returns the J x N_eff matrix P; deactivation is applied internally, so P
    acts on the first N_eff relay antennas.
    """
    if not isinstance(cfg, AntennaConfig):
        cfg = AntennaConfig(*cfg)
    report = check_gsa_feasibility(cfg, d)
    if not report.feasible:
        raise InfeasibleTuple(f"alignment rows unavailable: {report}")
    if not ch.matches(cfg):
        raise InvalidDesign("channel set does not match the configuration")
    ups = [
        ch.uplink[i][: report.n_eff, : report.m_eff[i]] for i in range(4)
    ]
    return _compression_matrix(
        ups, report.j, report.required_rows, report.n_eff, _as_rng(seed), tol
    )


def design_pair_precoders(p, h_i, h_j, d_pair: int, tol=nk.DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Precoders (V_i, V_j) aligning d_pair streams: P h_i V_i = P h_j V_j.

    Columns are the leading orthonormal null-space directions of
    ``P [h_i  -h_j]``, split into the two users' blocks.
    """
    p = nk.as_cmatrix(p, name="p")
    h_i = nk.as_cmatrix(h_i, name="h_i")
    h_j = nk.as_cmatrix(h_j, name="h_j")
    m_i, m_j = h_i.shape[1], h_j.shape[1]
    if d_pair == 0:
        return _empty(m_i, 0), _empty(m_j, 0)
    basis = nk.null_space_basis(p @ np.hstack([h_i, -h_j]), tol)
    if basis.shape[1] < d_pair:
        raise AlignmentInfeasible(
            f"pair null space has dimension {basis.shape[1]} < {d_pair}"
        )
    cols = basis[:, :d_pair]
    return cols[:m_i], cols[m_i:]


def complete_unidirectional(v_pair, m_eff: int, d_total: int, seed, tol=nk.DEFAULT_TOL) -> np.ndarray:
    """Random columns V_r with rank([v_pair  V_r]) == d_total.

    Used both for the surplus-stream precoders of the uplink and (in
    transposed form) the surplus-stream receive filters of the downlink.
    """
    v_pair = nk.as_cmatrix(v_pair, name="v_pair")
    if v_pair.shape[0] != m_eff:
        raise InvalidDesign(
            f"v_pair has {v_pair.shape[0]} rows, expected {m_eff}"
        )
    existing = v_pair.shape[1]
    if d_total < existing:
        raise InvalidDesign(f"d_total={d_total} < existing {existing} columns")
    if m_eff < d_total:
        raise TooManyStreams(f"{d_total} streams need {d_total} antennas, have {m_eff}")
    extra = d_total - existing
    if extra == 0:
        return _empty(m_eff, 0)
    rng = _as_rng(seed)
    for _ in range(_MAX_ATTEMPTS):
        v_uni = nk.random_complex_gaussian(m_eff, extra, rng)
        if nk.rank(np.hstack([v_pair, v_uni]), tol) == d_total:
            return v_uni
    raise SingularMatrix("random completion stayed rank deficient")


def mac_decoder(p, ups, v_pair, v_uni, tol=nk.DEFAULT_TOL) -> np.ndarray:
    """Zero-forcer W inverting the stacked compressed uplink matrix.

    Column blocks: [P H1 V1 | P H3 V3 | P H1 V1r | P H3 V3r]; applying W to
    the compressed receive vector yields the two network-coded sums followed
    by the two one-way stream blocks.
    """
    p = nk.as_cmatrix(p, name="p")
    j = p.shape[0]
    stacked = np.hstack([
        p @ ups[0] @ v_pair[0],
        p @ ups[2] @ v_pair[2],
        p @ ups[0] @ v_uni[0],
        p @ ups[2] @ v_uni[1],
    ])
    if stacked.shape != (j, j):
        raise InvalidDesign(
            f"stacked uplink matrix is {stacked.shape}, expected ({j}, {j})"
        )
    return nk.solve_square(stacked, np.eye(j, dtype=np.complex128), tol)


def _mac_side(
    ups: list[np.ndarray],
    m_eff: tuple[int, int, int, int],
    d: tuple[int, int, int, int],
    n_eff: int,
    rng: np.random.Generator,
    tol: nk.Tolerance,
):
    """One phase of the design (oriented: d1 >= d2, d3 >= d4 within pairs).

    Returns (P, pair precoders, surplus precoders, zero-forcer).
    """
    d1, d2, d3, d4 = d
    j = d1 + d3
    required = (
        max(0, j - m_eff[0] - m_eff[1] + d2),
        max(0, j - m_eff[2] - m_eff[3] + d4),
    )
    p = _compression_matrix(ups, j, required, n_eff, rng, tol)
    v1p, v2p = design_pair_precoders(p, ups[0], ups[1], d2, tol)
    v3p, v4p = design_pair_precoders(p, ups[2], ups[3], d4, tol)
    for v, streams in ((v1p, d2), (v2p, d2), (v3p, d4), (v4p, d4)):
        if streams and nk.rank(v, tol) < streams:
            raise AlignmentInfeasible("degenerate pair precoder block")
    v1r = complete_unidirectional(v1p, m_eff[0], d1, rng, tol)
    v3r = complete_unidirectional(v3p, m_eff[2], d3, rng, tol)
    v_pair = (v1p, v2p, v3p, v4p)
    v_uni = (v1r, v3r)
    w = mac_decoder(p, ups, v_pair, v_uni, tol)
    return p, v_pair, v_uni, w


def design_bc(cfg: AntennaConfig, d, ch: ChannelSet, tol=nk.DEFAULT_TOL, seed=0):
    """Stand-alone downlink design (Q, receive filters, zero-forcer T).

    Mirrors the uplink construction on the transposed downlink channels with
    pair members exchanged (each pair's surplus-stream receiver takes the
    sender role of the mirrored problem).  ``cfg`` canonical, ``d`` integer
    in-region and oriented with d1 >= d2, d3 >= d4; ``ch`` in canonical user
    order.  Returns ``(q, u_pair, u_uni, t)`` where ``u_pair`` are the four
    pair receive filters and ``u_uni`` the two surplus-stream filters (at
    users 2 and 4).
    """
    if not isinstance(cfg, AntennaConfig):
        cfg = AntennaConfig(*cfg)
    tup = _validated_tuple(cfg, d)
    d1, d2, d3, d4 = tup.as_ints()
    if d1 < d2 or d3 < d4:
        raise InvalidDesign("design_bc expects d1 >= d2 and d3 >= d4")
    report = check_gsa_feasibility(cfg, tup)
    if not report.feasible:
        raise InfeasibleTuple(f"alignment rows unavailable: {report}")
    if not ch.matches(cfg):
        raise InvalidDesign("channel set does not match the configuration")
    downs = [ch.downlink[i][: report.m_eff[i], : report.n_eff] for i in range(4)]
    mirrored_ups = [downs[1].T, downs[0].T, downs[3].T, downs[2].T]
    mirrored_m = (
        report.m_eff[1], report.m_eff[0], report.m_eff[3], report.m_eff[2]
    )
    pt, vp, vr, wt = _mac_side(
        mirrored_ups, mirrored_m, (d1, d2, d3, d4), report.n_eff, _as_rng(seed), tol
    )
    q = pt.T
    u_pair = (vp[1].T, vp[0].T, vp[3].T, vp[2].T)
    u_uni = (vr[0].T, vr[1].T)
    t = wt.T
    return q, u_pair, u_uni, t


@dataclass(frozen=True)
class DesignDiagnostics:
    """Relative residuals and rank checks of a finished design."""

    alignment_mac: tuple[float, float]
    alignment_bc: tuple[float, float]
    zero_forcing_mac: float
    zero_forcing_bc: float
    compression_rank_ok: bool
    stream_rank_ok: bool

    def max_alignment(self) -> float:
        return max(self.alignment_mac + self.alignment_bc)

    def ok(self, tol: nk.Tolerance) -> bool:
        return (
            self.compression_rank_ok
            and self.stream_rank_ok
            and self.max_alignment() <= tol.residual_tol
            and self.zero_forcing_mac <= tol.residual_tol
            and self.zero_forcing_bc <= tol.residual_tol
        )


@dataclass(frozen=True, eq=False)
class TransceiverDesign:
    """Complete two-phase design in the oriented canonical frame.

    ``user_order[s]`` gives the raw user index occupying oriented slot s;
    slots 0 and 2 are the surplus-stream senders of their pairs.  Matrices
    are sized for the post-deactivation antenna counts ``m_eff``/``n_eff``
    (deactivated antennas are the trailing ones).
    """

    config: AntennaConfig                      # canonical
    config_raw: AntennaConfig                  # as supplied by the caller
    dof: DoFTuple                              # oriented: d1 >= d2, d3 >= d4
    j: int
    regime: Regime
    user_order: tuple[int, int, int, int]
    m_eff: tuple[int, int, int, int]           # per oriented slot
    n_eff: int
    p: np.ndarray
    v_pair: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    v_uni: tuple[np.ndarray, np.ndarray]       # at slots 0 and 2
    w: np.ndarray
    q: np.ndarray
    u_pair: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    u_uni: tuple[np.ndarray, np.ndarray]       # at slots 1 and 3
    t: np.ndarray
    tol: nk.Tolerance

    @property
    def pair_streams(self) -> tuple[int, int]:
        d1, d2, d3, d4 = (int(v) for v in self.dof)
        return (d2, d4)

    @property
    def uni_streams(self) -> tuple[int, int]:
        d1, d2, d3, d4 = (int(v) for v in self.dof)
        return (d1 - d2, d3 - d4)

    @property
    def stream_slices(self) -> tuple[slice, slice, slice, slice]:
        """Layout of the J-vector: nc(1,2), nc(3,4), one-way(1->2), one-way(3->4)."""
        d2, d4 = self.pair_streams
        u1, u3 = self.uni_streams
        a, b, c = d2, d2 + d4, d2 + d4 + u1
        return (slice(0, a), slice(a, b), slice(b, c), slice(c, c + u3))

    def raw_dof(self) -> tuple[int, ...]:
        """Stream counts back in raw user order."""
        out = [0, 0, 0, 0]
        for slot, raw_index in enumerate(self.user_order):
            out[raw_index] = int(self.dof[slot])
        return tuple(out)

    def require_channels(self, ch: ChannelSet) -> None:
        if not ch.matches(self.config_raw):
            raise InvalidDesign(
                f"channel set sized {ch.user_antennas}/{ch.n} does not match "
                f"configuration {self.config_raw.as_tuple()}"
            )

    def effective_uplinks(self, ch: ChannelSet) -> list[np.ndarray]:
        self.require_channels(ch)
        return [
            ch.uplink[self.user_order[s]][: self.n_eff, : self.m_eff[s]]
            for s in range(4)
        ]

    def effective_downlinks(self, ch: ChannelSet) -> list[np.ndarray]:
        self.require_channels(ch)
        return [
            ch.downlink[self.user_order[s]][: self.m_eff[s], : self.n_eff]
            for s in range(4)
        ]

    def receive_filter(self, slot: int) -> np.ndarray:
        """Full receive filter of the user at ``slot`` (pair rows first)."""
        if slot in (1, 3):
            return np.vstack([self.u_pair[slot], self.u_uni[slot // 2]])
        return self.u_pair[slot]

    def check_shapes(self) -> None:
        d1, d2, d3, d4 = (int(v) for v in self.dof)
        expected = {
            "p": (self.p.shape, (self.j, self.n_eff)),
            "q": (self.q.shape, (self.n_eff, self.j)),
            "w": (self.w.shape, (self.j, self.j)),
            "t": (self.t.shape, (self.j, self.j)),
            "v_pair[0]": (self.v_pair[0].shape, (self.m_eff[0], d2)),
            "v_pair[1]": (self.v_pair[1].shape, (self.m_eff[1], d2)),
            "v_pair[2]": (self.v_pair[2].shape, (self.m_eff[2], d4)),
            "v_pair[3]": (self.v_pair[3].shape, (self.m_eff[3], d4)),
            "v_uni[0]": (self.v_uni[0].shape, (self.m_eff[0], d1 - d2)),
            "v_uni[1]": (self.v_uni[1].shape, (self.m_eff[2], d3 - d4)),
            "u_pair[0]": (self.u_pair[0].shape, (d2, self.m_eff[0])),
            "u_pair[1]": (self.u_pair[1].shape, (d2, self.m_eff[1])),
            "u_pair[2]": (self.u_pair[2].shape, (d4, self.m_eff[2])),
            "u_pair[3]": (self.u_pair[3].shape, (d4, self.m_eff[3])),
            "u_uni[0]": (self.u_uni[0].shape, (d1 - d2, self.m_eff[1])),
            "u_uni[1]": (self.u_uni[1].shape, (d3 - d4, self.m_eff[3])),
        }
        for name, (got, want) in expected.items():
            if got != want:
                raise InvalidDesign(f"{name} has shape {got}, expected {want}")
        if self.j != d1 + d3:
            raise InvalidDesign(f"j={self.j} inconsistent with streams {d1}+{d3}")

    def diagnostics(self, ch: ChannelSet) -> DesignDiagnostics:
        self.check_shapes()
        ups = self.effective_uplinks(ch)
        downs = self.effective_downlinks(ch)
        d1, d2, d3, d4 = (int(v) for v in self.dof)

        def rel(err: float, scale: float) -> float:
            return float(err / scale) if scale > 0 else float(err)

        align_mac = []
        align_bc = []
        for a, b, dp in ((0, 1, d2), (2, 3, d4)):
            scale = max(
                np.linalg.norm(self.p) * max(np.linalg.norm(ups[a]), np.linalg.norm(ups[b])),
                1.0,
            )
            err = np.linalg.norm(
                self.p @ ups[a] @ self.v_pair[a] - self.p @ ups[b] @ self.v_pair[b]
            )
            align_mac.append(rel(err, scale))
            scale = max(
                np.linalg.norm(self.q)
                * max(np.linalg.norm(downs[a]), np.linalg.norm(downs[b])),
                1.0,
            )
            err = np.linalg.norm(
                self.u_pair[a] @ downs[a] @ self.q - self.u_pair[b] @ downs[b] @ self.q
            )
            align_bc.append(rel(err, scale))

        eye = np.eye(self.j, dtype=np.complex128)
        stacked_mac = np.hstack([
            self.p @ ups[0] @ self.v_pair[0],
            self.p @ ups[2] @ self.v_pair[2],
            self.p @ ups[0] @ self.v_uni[0],
            self.p @ ups[2] @ self.v_uni[1],
        ])
        zf_mac = np.linalg.norm(self.w @ stacked_mac - eye) / max(1.0, np.sqrt(self.j))
        stacked_bc = np.vstack([
            self.u_pair[1] @ downs[1] @ self.q,
            self.u_pair[3] @ downs[3] @ self.q,
            self.u_uni[0] @ downs[1] @ self.q,
            self.u_uni[1] @ downs[3] @ self.q,
        ])
        zf_bc = np.linalg.norm(stacked_bc @ self.t - eye) / max(1.0, np.sqrt(self.j))

        rank_ok = nk.rank(self.p, self.tol) == self.j and nk.rank(self.q, self.tol) == self.j
        stream_ok = (
            nk.rank(np.hstack([self.v_pair[0], self.v_uni[0]]), self.tol) == d1
            and nk.rank(np.hstack([self.v_pair[2], self.v_uni[1]]), self.tol) == d3
            and nk.rank(self.receive_filter(1), self.tol) == d1
            and nk.rank(self.receive_filter(3), self.tol) == d3
        )
        return DesignDiagnostics(
            alignment_mac=tuple(align_mac),
            alignment_bc=tuple(align_bc),
            zero_forcing_mac=float(zf_mac),
            zero_forcing_bc=float(zf_bc),
            compression_rank_ok=bool(rank_ok),
            stream_rank_ok=bool(stream_ok),
        )

    def validate(self, ch: ChannelSet) -> DesignDiagnostics:
        diag = self.diagnostics(ch)
        if not diag.ok(self.tol):
            raise InvalidDesign(f"design fails its invariants: {diag}")
        return diag


def _orientation(d: DoFTuple) -> tuple[int, int, int, int]:
    """Canonical slot occupying each oriented slot (larger-d member first)."""
    slots = [0, 1, 2, 3]
    if d.d1 < d.d2:
        slots[0], slots[1] = slots[1], slots[0]
    if d.d3 < d.d4:
        slots[2], slots[3] = slots[3], slots[2]
    return tuple(slots)


def synthesize(
    cfg_raw,
    d_raw,
    seed: int = 0,
    channels: ChannelSet | None = None,
    tol: nk.Tolerance = nk.DEFAULT_TOL,
    max_attempts: int = _MAX_ATTEMPTS,
) -> TransceiverDesign:
    """Build and verify the full two-phase design for one instance.

    ``cfg_raw`` and ``d_raw`` may be in any user order; the configuration is
    canonicalized, pair members are oriented so the surplus sender comes
    first, and the finished design records the oriented-slot -> raw-user
    mapping.  When ``channels`` is omitted a realization is drawn from
    ``ChannelSet.random(cfg_raw, seed)``, so callers can regenerate it.

    Degenerate random draws (rank failures, singular stacks) are retried
    with fresh design randomness up to ``max_attempts`` times before the
    underlying error propagates.
    """
    if not isinstance(cfg_raw, AntennaConfig):
        cfg_raw = AntennaConfig(*cfg_raw)
    cfg, perm = canonicalize(cfg_raw)
    d_can = DoFTuple.of(perm.to_canonical(tuple(DoFTuple.of(d_raw))))
    tup = _validated_tuple(cfg, d_can)

    orient = _orientation(tup)
    user_order = tuple(perm.order[orient[s]] for s in range(4))
    d = tuple(int(tup[orient[s]]) for s in range(4))
    report = check_gsa_feasibility(cfg, tup)
    if not report.feasible:
        raise InfeasibleTuple(f"alignment rows unavailable: {report}")
    m_eff = tuple(report.m_eff[orient[s]] for s in range(4))
    n_eff = report.n_eff

    if channels is None:
        channels = ChannelSet.random(cfg_raw, seed)
    elif not channels.matches(cfg_raw):
        raise InvalidDesign("channel set does not match the raw configuration")

    ups = [
        channels.uplink[user_order[s]][:n_eff, : m_eff[s]] for s in range(4)
    ]
    downs = [
        channels.downlink[user_order[s]][: m_eff[s], :n_eff] for s in range(4)
    ]

    last_error: Exception | None = None
    for attempt in range(max_attempts):
        rng = np.random.default_rng((seed, attempt, 0x675A))
        try:
            p, v_pair, v_uni, w = _mac_side(ups, m_eff, d, n_eff, rng, tol)
            mirrored_ups = [downs[1].T, downs[0].T, downs[3].T, downs[2].T]
            mirrored_m = (m_eff[1], m_eff[0], m_eff[3], m_eff[2])
            pt, vp_m, vr_m, wt = _mac_side(mirrored_ups, mirrored_m, d, n_eff, rng, tol)
            design = TransceiverDesign(
                config=cfg,
                config_raw=cfg_raw,
                dof=DoFTuple.of(d),
                j=report.j,
                regime=regime_of(cfg),
                user_order=user_order,
                m_eff=m_eff,
                n_eff=n_eff,
                p=p,
                v_pair=v_pair,
                v_uni=v_uni,
                w=w,
                q=pt.T,
                u_pair=(vp_m[1].T, vp_m[0].T, vp_m[3].T, vp_m[2].T),
                u_uni=(vr_m[0].T, vr_m[1].T),
                t=wt.T,
                tol=tol,
            )
            design.validate(channels)
            return design
        except (SingularMatrix, AlignmentInfeasible, InvalidDesign) as exc:
            last_error = exc
    raise last_error if last_error is not None else SingularMatrix("synthesis failed")
