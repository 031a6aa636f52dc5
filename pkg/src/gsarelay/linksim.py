"""Two-phase link execution: exact recovery checks and rate estimates.

:func:`run_noiseless` pushes a block of symbols through relay compression,
zero-forcing, re-encoding, and per-user filtering with noise switched off;
after each user cancels its own known contribution the recovered streams
must match the partner's transmitted streams to the design's residual
tolerance.

:func:`run_noisy` evaluates the Gaussian-input mutual information of the
exact end-to-end linear model per user (log-det formula).  Transmit symbols
are scaled so every user meets the power constraint and the relay transmit
vector is rescaled to its own constraint; relay noise forwarded through the
zero-forcers is kept as colored noise in the per-user covariance.  Rates are
therefore deterministic; ``num_trials`` only adds a Monte-Carlo residual
diagnostic.

:func:`estimate_dof_slope` turns two high-power rate evaluations into the
sum-DoF slope, the quantity the synthesized stream counts must reproduce.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numkernel as nk
from .errors import InvalidDesign
from .synthesis import ChannelSet, TransceiverDesign

__all__ = [
    "SymbolBlock",
    "SnrPoint",
    "RecoveryReport",
    "MutualInfoReport",
    "run_noiseless",
    "run_noisy",
    "estimate_dof_slope",
]

_PARTNER = (1, 0, 3, 2)


def _as_vector(values, length: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.complex128).reshape(-1)
    if arr.shape[0] != length:
        raise InvalidDesign(f"{name} has length {arr.shape[0]}, expected {length}")
    if arr.size and not np.isfinite(arr).all():
        raise InvalidDesign(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True, eq=False)
class SymbolBlock:
    """Transmit symbols in raw user order.

    ``pair[i]`` holds user i's half of the pair exchange (length
    min(d_i, d_partner)); ``uni[i]`` holds the surplus one-way streams,
    nonempty only at the pair member sending more.
    """

    pair: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    uni: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]

    @classmethod
    def random(cls, d_raw, seed) -> "SymbolBlock":
        """Unit-energy CN(0,1) symbols for the given raw stream counts."""
        counts = tuple(int(v) for v in d_raw)
        if len(counts) != 4 or any(v < 0 for v in counts):
            raise InvalidDesign(f"bad stream counts {d_raw!r}")
        rng = np.random.default_rng(seed)
        pair, uni = [], []
        for i in range(4):
            shared = min(counts[i], counts[_PARTNER[i]])
            extra = counts[i] - shared
            pair.append(nk.random_complex_gaussian(shared, 1, rng).reshape(-1))
            uni.append(nk.random_complex_gaussian(extra, 1, rng).reshape(-1))
        return cls(pair=tuple(pair), uni=tuple(uni))

    def scaled(self, factor: complex) -> "SymbolBlock":
        return SymbolBlock(
            pair=tuple(factor * s for s in self.pair),
            uni=tuple(factor * s for s in self.uni),
        )


@dataclass(frozen=True)
class SnrPoint:
    """Transmit power constraint (linear) against unit-variance noise."""

    p: float
    noise_variance: float = 1.0

    def __post_init__(self) -> None:
        if not (self.p > 0.0):
            raise ValueError(f"power must be positive, got {self.p!r}")
        if not (self.noise_variance > 0.0):
            raise ValueError("noise variance must be positive")


@dataclass(frozen=True)
class RecoveryReport:
    """Outcome of a noiseless end-to-end run (errors in raw user order)."""

    max_abs_error: float
    per_user_errors: tuple[float, float, float, float]
    passed: bool


def _oriented_symbols(design: TransceiverDesign, symbols: SymbolBlock):
    """Map a raw-indexed symbol block onto oriented slots, shape-checked."""
    d2, d4 = design.pair_streams
    u1, u3 = design.uni_streams
    pair_lengths = (d2, d2, d4, d4)
    uni_lengths = (u1, 0, u3, 0)
    s_pair, s_uni = [], []
    for slot in range(4):
        raw = design.user_order[slot]
        s_pair.append(
            _as_vector(symbols.pair[raw], pair_lengths[slot], f"pair symbols of user {raw + 1}")
        )
        s_uni.append(
            _as_vector(symbols.uni[raw], uni_lengths[slot], f"one-way symbols of user {raw + 1}")
        )
    return s_pair, s_uni


def _relay_symbol_vector(design: TransceiverDesign, s_pair, s_uni) -> np.ndarray:
    """The clean J-vector the relay should decode."""
    return np.concatenate([
        s_pair[0] + s_pair[1],
        s_pair[2] + s_pair[3],
        s_uni[0],
        s_uni[2],
    ])


def run_noiseless(
    design: TransceiverDesign, ch: ChannelSet, symbols: SymbolBlock
) -> RecoveryReport:
    """Execute both phases with noise off and compare recovered streams.

    Each user subtracts its own known pair contribution from the decoded
    network-coded sum; the remainder (plus any one-way streams) must equal
    the partner's symbols.
    """
    ups = design.effective_uplinks(ch)
    downs = design.effective_downlinks(ch)
    s_pair, s_uni = _oriented_symbols(design, symbols)

    y_relay = np.zeros(design.n_eff, dtype=np.complex128)
    for slot in range(4):
        x = design.v_pair[slot] @ s_pair[slot]
        if slot in (0, 2):
            x = x + design.v_uni[slot // 2] @ s_uni[slot]
        y_relay += ups[slot] @ x

    s_hat = design.w @ (design.p @ y_relay)
    x_relay = design.q @ (design.t @ s_hat)

    errors = [0.0, 0.0, 0.0, 0.0]
    for slot in range(4):
        y_user = downs[slot] @ x_relay
        filtered = design.receive_filter(slot) @ y_user
        d_pair = s_pair[slot].shape[0]
        recovered_pair = filtered[:d_pair] - s_pair[slot]
        partner = _PARTNER[slot]
        diffs = [recovered_pair - s_pair[partner]]
        if slot in (1, 3):
            expected_uni = s_uni[partner]
            diffs.append(filtered[d_pair:] - expected_uni)
        err = max(
            (float(np.max(np.abs(dv))) for dv in diffs if dv.size),
            default=0.0,
        )
        errors[design.user_order[slot]] = err

    max_err = max(errors)
    return RecoveryReport(
        max_abs_error=max_err,
        per_user_errors=tuple(errors),
        passed=max_err <= design.tol.residual_tol,
    )


@dataclass(frozen=True)
class MutualInfoReport:
    """Per-user Gaussian mutual information (bits per two-phase use)."""

    per_user_bits: tuple[float, float, float, float]
    sum_bits: float
    symbol_power: float
    relay_gain: float
    empirical_noise_rms: tuple[float, float, float, float] | None = None


def _stream_mixer(design: TransceiverDesign) -> tuple[np.ndarray, list[dict]]:
    """Matrix mapping the stacked per-user symbol vector onto the J relay
    streams, plus per-slot column bookkeeping (own / desired columns)."""
    d2, d4 = design.pair_streams
    u1, u3 = design.uni_streams
    sizes = (d2, d2, d4, d4, u1, u3)  # s1p s2p s3p s4p s1r s3r (oriented)
    offsets = np.cumsum((0,) + sizes)
    total = int(offsets[-1])
    j = design.j
    mixer = np.zeros((j, total), dtype=np.complex128)
    nc12, nc34, uni1, uni3 = design.stream_slices

    def block(rows: slice, col_block: int) -> None:
        cols = slice(int(offsets[col_block]), int(offsets[col_block + 1]))
        size = cols.stop - cols.start
        mixer[rows, cols] = np.eye(size, dtype=np.complex128)

    block(nc12, 0)
    block(nc12, 1)
    block(nc34, 2)
    block(nc34, 3)
    block(uni1, 4)
    block(uni3, 5)

    def cols_of(block_index: int) -> list[int]:
        return list(range(int(offsets[block_index]), int(offsets[block_index + 1])))

    slots = []
    for slot, (own_blocks, desired_blocks) in enumerate(
        (((0, 4), (1,)), ((1,), (0, 4)), ((2, 5), (3,)), ((3,), (2, 5)))
    ):
        own = [c for b in own_blocks for c in cols_of(b)]
        desired = [c for b in desired_blocks for c in cols_of(b)]
        other = [c for c in range(total) if c not in own and c not in desired]
        slots.append({"own": own, "desired": desired, "other": other})
    return mixer, slots


def run_noisy(
    design: TransceiverDesign,
    ch: ChannelSet,
    snr: SnrPoint,
    num_trials: int = 0,
    seed: int = 0,
) -> MutualInfoReport:
    """Exact per-user mutual information of the end-to-end linear model.

    Symbols are i.i.d. CN(0, p_s) with p_s chosen so the busiest user meets
    the power constraint; the relay output is scaled to its constraint; the
    noise covariance includes relay noise forwarded through T W P and any
    (numerically tiny) residual cross-pair leakage of the zero-forcers.
    """
    downs = design.effective_downlinks(ch)
    mixer, slots = _stream_mixer(design)
    sigma2 = snr.noise_variance

    tx_norms = [
        np.linalg.norm(design.v_pair[s]) ** 2
        + (np.linalg.norm(design.v_uni[s // 2]) ** 2 if s in (0, 2) else 0.0)
        for s in range(4)
    ]
    c_tx = max(tx_norms)
    if c_tx == 0.0 or design.j == 0:
        zeros = (0.0, 0.0, 0.0, 0.0)
        return MutualInfoReport(zeros, 0.0, 0.0, 0.0, None)

    p_s = snr.p / c_tx
    qt = design.q @ design.t
    wp = design.w @ design.p
    relay_signal = np.linalg.norm(qt @ mixer) ** 2
    relay_noise = sigma2 * np.linalg.norm(qt @ wp) ** 2
    beta2 = snr.p / (p_s * relay_signal + relay_noise)

    per_user = [0.0, 0.0, 0.0, 0.0]
    models = []
    for slot in range(4):
        u_full = design.receive_filter(slot)
        g = u_full @ downs[slot] @ qt
        a_des = g @ mixer[:, slots[slot]["desired"]]
        a_other = g @ mixer[:, slots[slot]["other"]]
        f_noise = g @ wp
        cov = (
            beta2 * sigma2 * (f_noise @ f_noise.conj().T)
            + sigma2 * (u_full @ u_full.conj().T)
            + p_s * beta2 * (a_other @ a_other.conj().T)
        )
        models.append((u_full, g, a_des, f_noise, cov))
        d_recv = a_des.shape[0]
        if d_recv == 0:
            continue
        gram = np.linalg.solve(cov, a_des) @ a_des.conj().T
        sign, logdet = np.linalg.slogdet(
            np.eye(d_recv, dtype=np.complex128) + p_s * beta2 * gram
        )
        per_user[design.user_order[slot]] = float(logdet / np.log(2.0))

    empirical = None
    if num_trials > 0:
        rng = np.random.default_rng((seed, 0x11015E))
        rms = [0.0, 0.0, 0.0, 0.0]
        beta = np.sqrt(beta2)
        for slot in range(4):
            u_full, g, a_des, f_noise, cov = models[slot]
            d_recv = a_des.shape[0]
            if d_recv == 0:
                continue
            total = 0.0
            for _ in range(num_trials):
                n_relay = np.sqrt(sigma2) * nk.random_complex_gaussian(
                    design.n_eff, 1, rng
                ).reshape(-1)
                n_user = np.sqrt(sigma2) * nk.random_complex_gaussian(
                    u_full.shape[1], 1, rng
                ).reshape(-1)
                z = beta * (f_noise @ n_relay) + u_full @ n_user
                total += float(np.vdot(z, z).real)
            rms[design.user_order[slot]] = float(
                np.sqrt(total / (num_trials * d_recv))
            )
        empirical = tuple(rms)

    return MutualInfoReport(
        per_user_bits=tuple(per_user),
        sum_bits=float(sum(per_user)),
        symbol_power=float(p_s),
        relay_gain=float(beta2),
        empirical_noise_rms=empirical,
    )


def estimate_dof_slope(
    design: TransceiverDesign,
    ch: ChannelSet,
    p_low: float = 1e6,
    p_high: float = 1e8,
) -> float:
    """Sum-rate slope against log2(power) between two high-power points.

    For a working design this sits within a few percent of the tuple's
    total stream count.
    """
    if not (p_high > p_low >= 1e4):
        raise ValueError("need p_high > p_low >= 1e4 for the high-power regime")
    low = run_noisy(design, ch, SnrPoint(p_low)).sum_bits
    high = run_noisy(design, ch, SnrPoint(p_high)).sum_bits
    return (high - low) / (np.log2(p_high) - np.log2(p_low))
