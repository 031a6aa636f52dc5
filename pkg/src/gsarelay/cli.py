"""Command-line front end.

Subcommands: ``region``, ``sumdof``, ``check``, ``synth``, ``verify``,
``sweep``.  Configurations are accepted in any user order; reports carry the
canonicalization permutation so results map back to the caller's indexing.

Output formats: ``text`` (human readable), ``json`` (canonical form:
sorted keys, two-space indent, so parse + re-serialize is byte identical),
``csv``.  Exact rationals serialize as ``{"num": .., "den": .., "decimal": ..}``.

Exit codes: 0 success, 2 malformed input, 3 infeasible/non-integer tuple
where synthesis needs one, 4 internal degeneracy that survived reseeding.
"""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction

import click

from . import numkernel as nk
from .errors import (
    GsaRelayError,
    InfeasibleTuple,
    InvalidConfig,
    InvalidTuple,
    NonIntegerTuple,
    SingularMatrix,
)
from .linksim import RecoveryReport, SymbolBlock, estimate_dof_slope, run_noiseless
from .region import (
    AntennaConfig,
    DoFTuple,
    canonical_configs,
    canonicalize,
    optimal_vertices,
    region_constraints,
    sum_dof_closed_form,
    sum_dof_oracle,
)
from .synthesis import ChannelSet, synthesize

__all__ = ["main"]


class _InfeasibleCliError(click.ClickException):
    exit_code = 3


class _DegenerateCliError(click.ClickException):
    exit_code = 4


def _parse_config(text: str) -> AntennaConfig:
    parts = text.split(",")
    if len(parts) != 5:
        raise click.UsageError(
            f"--config needs 5 comma-separated integers M1,M2,M3,M4,N, got {text!r}"
        )
    try:
        values = [int(p.strip()) for p in parts]
        return AntennaConfig(*values)
    except (ValueError, InvalidConfig) as exc:
        raise click.UsageError(f"bad --config {text!r}: {exc}") from exc


def _parse_tuple(text: str) -> DoFTuple:
    parts = text.split(",")
    if len(parts) != 4:
        raise click.UsageError(
            f"--tuple needs 4 comma-separated rationals d1,d2,d3,d4, got {text!r}"
        )
    try:
        return DoFTuple.of([Fraction(p.strip()) for p in parts])
    except (ValueError, ZeroDivisionError, InvalidTuple) as exc:
        raise click.UsageError(f"bad --tuple {text!r}: {exc}") from exc


def _rational(value: Fraction) -> dict:
    return {
        "num": value.numerator,
        "den": value.denominator,
        "decimal": float(value),
    }


def _tuple_json(d: DoFTuple) -> list[dict]:
    return [_rational(v) for v in d]


def _tuple_text(d) -> str:
    return "(" + ", ".join(str(v) for v in d) + ")"


def _emit_json(report: dict) -> None:
    click.echo(json.dumps(report, indent=2, sort_keys=True))


def _emit_kv_csv(report: dict) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "value"])
    for key in sorted(report):
        writer.writerow([key, json.dumps(report[key], sort_keys=True)])
    click.echo(buf.getvalue(), nl=False)


_OUTPUT = click.option(
    "--output",
    type=click.Choice(["text", "json", "csv"]),
    default="text",
    show_default=True,
    help="Report format.",
)
_CONFIG = click.option(
    "--config",
    "config_text",
    required=True,
    metavar="M1,M2,M3,M4,N",
    help="Antenna counts, any user order.",
)
_TUPLE = click.option(
    "--tuple",
    "tuple_text",
    required=True,
    metavar="D1,D2,D3,D4",
    help="Per-user stream counts (rationals such as 5 or 7/2).",
)
_SEED = click.option(
    "--seed",
    type=int,
    default=0,
    show_default=True,
    envvar="GSARELAY_SEED",
    help="Seed for channels and design randomness (env GSARELAY_SEED).",
)


def _tol_options(fn):
    fn = click.option(
        "--tol-rank",
        type=float,
        default=nk.DEFAULT_TOL.rel_rank_tol,
        show_default=True,
        help="Relative singular-value cutoff.",
    )(fn)
    fn = click.option(
        "--tol-residual",
        type=float,
        default=nk.DEFAULT_TOL.residual_tol,
        show_default=True,
        help="Alignment/recovery residual bound.",
    )(fn)
    return fn


def _make_tol(tol_rank: float, tol_residual: float) -> nk.Tolerance:
    try:
        return nk.Tolerance(rel_rank_tol=tol_rank, residual_tol=tol_residual)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc


def _canonical_report(raw: AntennaConfig) -> tuple[AntennaConfig, dict]:
    cfg, perm = canonicalize(raw)
    info = {
        "raw": list(raw.as_tuple()),
        "canonical": list(cfg.as_tuple()),
        "permutation": {
            "within_pair_swap_12": perm.within_pair_swap_12,
            "within_pair_swap_34": perm.within_pair_swap_34,
            "pair_swap": perm.pair_swap,
            "canonical_slot_to_raw_user": [i + 1 for i in perm.order],
        },
    }
    return cfg, info


@click.group()
def main() -> None:
    """DoF region and signal-alignment toolkit for the two-pair relay channel."""


@main.command()
@_CONFIG
@_OUTPUT
def region(config_text: str, output: str) -> None:
    """List the 12 region facets of a configuration."""
    cfg, cfg_info = _canonical_report(_parse_config(config_text))
    constraints = region_constraints(cfg)
    report = {
        "config": cfg_info,
        "constraints": [
            {
                "label": c.label,
                "coeffs": list(c.coeffs),
                "rhs": _rational(c.rhs),
                "inequality": c.render(),
            }
            for c in constraints
        ],
    }
    if output == "json":
        _emit_json(report)
    elif output == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["label", "c1", "c2", "c3", "c4", "rhs"])
        for c in constraints:
            writer.writerow([c.label, *c.coeffs, int(c.rhs)])
        click.echo(buf.getvalue(), nl=False)
    else:
        click.echo(f"canonical config: {tuple(cfg.as_tuple())}")
        for c in constraints:
            click.echo(f"  ({c.label})  {c.render()}")


@main.command()
@_CONFIG
@_OUTPUT
def sumdof(config_text: str, output: str) -> None:
    """Optimal sum DoF: closed form, regime, vertices, oracle cross-check."""
    cfg, cfg_info = _canonical_report(_parse_config(config_text))
    closed = sum_dof_closed_form(cfg)
    oracle = sum_dof_oracle(cfg)
    vertices = optimal_vertices(cfg)
    report = {
        "config": cfg_info,
        "sum_dof": _rational(closed.value),
        "sum_dof_exact": str(closed.value),
        "regime": closed.regime.value,
        "regime_condition": closed.regime.condition,
        "achieving_vertices": [_tuple_json(v) for v in vertices],
        "active_labels": sorted(closed.active_labels),
        "oracle_match": closed.value == oracle.value,
    }
    if output == "json":
        _emit_json(report)
    elif output == "csv":
        _emit_kv_csv(report)
    else:
        click.echo(f"canonical config: {tuple(cfg.as_tuple())}")
        click.echo(f"sum DoF: {closed.value} (= {float(closed.value):.6g})")
        click.echo(f"regime: {closed.regime.value} ({closed.regime.condition})")
        for v in vertices:
            click.echo(f"vertex: {_tuple_text(v)}")
        click.echo(f"active facets: {', '.join(sorted(closed.active_labels))}")
        click.echo(f"oracle match: {report['oracle_match']}")


@main.command()
@_CONFIG
@_TUPLE
@_OUTPUT
def check(config_text: str, tuple_text: str, output: str) -> None:
    """Membership test of a DoF tuple (raw user order) against the region."""
    raw = _parse_config(config_text)
    cfg, cfg_info = _canonical_report(raw)
    _, perm = canonicalize(raw)
    d_raw = _parse_tuple(tuple_text)
    d_can = DoFTuple.of(perm.to_canonical(tuple(d_raw)))
    violated = [
        c.label for c in region_constraints(cfg) if not c.satisfied(d_can)
    ]
    report = {
        "config": cfg_info,
        "tuple_raw": _tuple_json(d_raw),
        "tuple_canonical": _tuple_json(d_can),
        "in_region": not violated,
        "violated_labels": violated,
    }
    if output == "json":
        _emit_json(report)
    elif output == "csv":
        _emit_kv_csv(report)
    else:
        click.echo(f"tuple {_tuple_text(d_raw)} on {tuple(raw.as_tuple())}")
        click.echo(f"in_region: {not violated}")
        if violated:
            click.echo(f"violated: {', '.join(violated)}")


def _synthesize_or_exit(raw, d_raw, seed, tol):
    try:
        design = synthesize(raw, d_raw, seed=seed, tol=tol)
        channels = ChannelSet.random(raw, seed)
        return design, channels
    except (NonIntegerTuple, InfeasibleTuple) as exc:
        raise _InfeasibleCliError(str(exc)) from exc
    except (SingularMatrix, GsaRelayError) as exc:
        raise _DegenerateCliError(str(exc)) from exc


def _design_report(design, channels) -> dict:
    diag = design.diagnostics(channels)
    return {
        "j": design.j,
        "regime": design.regime.value,
        "n_eff": design.n_eff,
        "m_eff": list(design.m_eff),
        "oriented_slot_to_raw_user": [i + 1 for i in design.user_order],
        "dof_oriented": [int(v) for v in design.dof],
        "alignment_residual_mac": list(diag.alignment_mac),
        "alignment_residual_bc": list(diag.alignment_bc),
        "zero_forcing_residual_mac": diag.zero_forcing_mac,
        "zero_forcing_residual_bc": diag.zero_forcing_bc,
        "shapes": {
            "p": list(design.p.shape),
            "q": list(design.q.shape),
            "w": list(design.w.shape),
            "t": list(design.t.shape),
        },
    }


@main.command()
@_CONFIG
@_TUPLE
@_SEED
@_tol_options
@_OUTPUT
def synth(config_text, tuple_text, seed, tol_residual, tol_rank, output) -> None:
    """Synthesize the transmission design on a seeded random channel."""
    raw = _parse_config(config_text)
    d_raw = _parse_tuple(tuple_text)
    tol = _make_tol(tol_rank, tol_residual)
    design, channels = _synthesize_or_exit(raw, d_raw, seed, tol)
    report = {"seed": seed, "design": _design_report(design, channels)}
    if output == "json":
        _emit_json(report)
    elif output == "csv":
        _emit_kv_csv(report)
    else:
        d = report["design"]
        click.echo(f"synthesized J={d['j']} design (regime {d['regime']})")
        click.echo(f"slot->user: {d['oriented_slot_to_raw_user']}  m_eff={d['m_eff']}  n_eff={d['n_eff']}")
        click.echo(
            "alignment residuals: mac={}, bc={}".format(
                d["alignment_residual_mac"], d["alignment_residual_bc"]
            )
        )


@main.command()
@_CONFIG
@_TUPLE
@_SEED
@_tol_options
@click.option("--p-low", type=float, default=1e6, show_default=True)
@click.option("--p-high", type=float, default=1e8, show_default=True)
@_OUTPUT
def verify(config_text, tuple_text, seed, tol_residual, tol_rank, p_low, p_high, output) -> None:
    """Synthesize, run the noiseless link, and estimate the DoF slope."""
    raw = _parse_config(config_text)
    d_raw = _parse_tuple(tuple_text)
    tol = _make_tol(tol_rank, tol_residual)
    design, channels = _synthesize_or_exit(raw, d_raw, seed, tol)
    symbols = SymbolBlock.random(design.raw_dof(), (seed, 0x53))
    recovery: RecoveryReport = run_noiseless(design, channels, symbols)
    slope = estimate_dof_slope(design, channels, p_low, p_high)
    expected = sum(design.raw_dof())
    report = {
        "seed": seed,
        "design": _design_report(design, channels),
        "recovery": {
            "max_abs_error": recovery.max_abs_error,
            "per_user_errors": list(recovery.per_user_errors),
            "passed": recovery.passed,
        },
        "dof_slope": slope,
        "dof_slope_expected": expected,
        "passed": bool(
            recovery.passed
            and (expected == 0 or abs(slope - expected) <= 0.05 * expected)
        ),
    }
    if output == "json":
        _emit_json(report)
    elif output == "csv":
        _emit_kv_csv(report)
    else:
        click.echo(f"recovery passed: {recovery.passed} (max error {recovery.max_abs_error:.3e})")
        click.echo(f"DoF slope: {slope:.4f} (streams: {expected})")
        click.echo(f"verify passed: {report['passed']}")


@main.command()
@click.option("--m-max", type=int, required=True, help="Largest user antenna count.")
@click.option("--n-max", type=int, required=True, help="Largest relay antenna count.")
@_OUTPUT
def sweep(m_max: int, n_max: int, output: str) -> None:
    """Sweep all canonical configs, cross-checking closed form vs oracle."""
    if m_max < 1 or n_max < 1:
        raise click.UsageError("--m-max and --n-max must be >= 1")
    rows = []
    mismatches = 0
    for cfg in canonical_configs(m_max, n_max):
        closed = sum_dof_closed_form(cfg)
        oracle = sum_dof_oracle(cfg)
        match = closed.value == oracle.value
        mismatches += 0 if match else 1
        rows.append(
            (
                cfg.m1, cfg.m2, cfg.m3, cfg.m4, cfg.n,
                closed.value.numerator, closed.value.denominator,
                closed.regime.value, match,
            )
        )
    header = [
        "m1", "m2", "m3", "m4", "n",
        "sum_dof_num", "sum_dof_den", "regime", "oracle_match",
    ]
    if output == "json":
        _emit_json({
            "header": header,
            "rows": [list(r[:-1]) + [bool(r[-1])] for r in rows],
        })
    elif output == "text":
        for r in rows:
            click.echo(
                f"({r[0]},{r[1]},{r[2]},{r[3]},{r[4]}): "
                f"{Fraction(r[5], r[6])} regime={r[7]} oracle_match={r[8]}"
            )
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for r in rows:
            writer.writerow([*r[:-1], str(bool(r[-1])).lower()])
        click.echo(buf.getvalue(), nl=False)
    if mismatches:
        raise _DegenerateCliError(
            f"{mismatches} configs disagree between closed form and oracle"
        )


if __name__ == "__main__":
    main()
