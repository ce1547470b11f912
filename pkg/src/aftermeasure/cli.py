"""Command-line interface.

Exit status: 0 when the computation ran (whatever the verdict), 1 for usage
errors, 2 for invalid input, 3 for numerical failure. JSON payloads carry
the tool version, dimension, seed and tolerance actually used.

``AFTERMEASURE_SEED`` and ``AFTERMEASURE_TOL`` override the default seed and
tolerance; explicit flags take precedence.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .ensemble import entry_records_to_csv, simulate_entries, tomography_verdict
from .errors import AfterMeasureError, NumericalError, ValidationError
from .geometry import mc_fraction, membership, region_predicate, volume_report
from .measurements import apply_channel, naimark_dilate, probabilities
from .serialization import (
    fiducial_from_json,
    fiducial_to_json,
    load_json,
    matrix_to_json,
    resolution_from_json,
    resolution_to_json,
    rows_to_csv,
    state_from_json,
)
from .sic import (
    builtin_fiducial,
    find_fiducial,
    sic_projectors,
    sic_povm,
    verify_sic,
)
from .states import maximally_mixed, random_density_hs

DEFAULT_SEED = 20100601
DEFAULT_TOL = 1e-9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _env_default(name, cast, fallback):
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    try:
        return cast(raw)
    except ValueError:
        raise UsageError(f"bad value for {name}: {raw!r}") from None


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return None if math.isnan(obj) or math.isinf(obj) else obj
    return obj


def _payload(args, dim, **body) -> dict:
    head = {
        "tool": "aftermeasure",
        "version": __version__,
        "command": args.command_name,
        "dim": dim,
        "seed": getattr(args, "seed", None),
        "tolerance": args.tol,
    }
    head.update(body)
    return head


# -- subcommands --------------------------------------------------------------


def cmd_sic_verify(args):
    if args.fiducial:
        fid = fiducial_from_json(load_json(args.fiducial))
        if fid.dim != args.dim:
            raise ValidationError("shape", f"fiducial dim {fid.dim} != --dim {args.dim}")
    else:
        fid = builtin_fiducial(args.dim)
    report = verify_sic(sic_projectors(fid))
    return 0, _payload(
        args,
        args.dim,
        provenance=fid.provenance,
        max_deviation=report.max_deviation,
        completeness_residual=report.completeness_residual,
        complete=report.complete(args.tol),
    )


def cmd_sic_find(args):
    fid = find_fiducial(args.dim, seed=args.seed, restarts=args.restarts, max_iters=args.max_iters)
    body = fiducial_to_json(fid)
    body.pop("dim")
    payload = _payload(args, args.dim, converged=fid.converged, restarts=args.restarts, **body)
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(_clean(fiducial_to_json(fid)), fh, indent=2)
            fh.write("\n")
    return (0 if fid.converged else 3), payload


def cmd_sic_resolution(args):
    return 0, resolution_to_json(sic_povm(args.dim, seed=args.seed))


def cmd_volumes(args):
    top = args.max_dim or args.dim
    if top < args.dim:
        raise UsageError("--max-dim must be >= --dim")
    rows = [volume_report(d).as_dict() for d in range(args.dim, top + 1)]
    if args.format == "csv":
        return 0, rows_to_csv(rows)
    if len(rows) == 1:
        return 0, _payload(args, args.dim, **{k: v for k, v in rows[0].items() if k != "dim"})
    return 0, _payload(args, args.dim, rows=rows)


def _load_pair(args):
    m = resolution_from_json(load_json(args.resolution))
    w = state_from_json(load_json(args.state))
    if w.shape[0] != m.dim:
        raise ValidationError("shape", f"state dim {w.shape[0]} vs resolution dim {m.dim}")
    return m, w


def cmd_channel_apply(args):
    m, w = _load_pair(args)
    return 0, _payload(
        args,
        m.dim,
        kind=m.kind,
        probabilities=probabilities(m, w),
        state=matrix_to_json(apply_channel(m, w)),
    )


def cmd_membership(args):
    m, w = _load_pair(args)
    verdict = membership(m, w, args.tol)
    return 0, _payload(args, m.dim, kind=m.kind, **verdict.as_dict())


def cmd_mc_volume(args):
    m = sic_povm(args.dim, seed=args.seed)
    estimate = mc_fraction(
        region_predicate(args.region, m, args.tol),
        args.dim,
        args.n,
        np.random.default_rng(args.seed),
        workers=args.workers,
    )
    report = volume_report(args.dim)
    exact = report.v_am_over_vw if args.region == "vam" else report.conv_over_vw
    z = (estimate.estimate - exact) / estimate.standard_error if estimate.standard_error else None
    return 0, _payload(
        args,
        args.dim,
        region=args.region,
        measure=estimate.measure,
        n=estimate.n,
        hits=estimate.hits,
        estimate=estimate.estimate,
        standard_error=estimate.standard_error,
        exact=exact,
        z_score=z,
    )


def cmd_simulate_entry(args):
    m = sic_povm(args.dim, seed=args.seed)
    if args.state:
        w = state_from_json(load_json(args.state))
        if w.shape[0] != args.dim:
            raise ValidationError("shape", f"state dim {w.shape[0]} != --dim {args.dim}")
    else:
        w = maximally_mixed(args.dim)
    seeds = [args.seed + i for i in range(args.trajectories)]
    records = simulate_entries(m, w, seeds, args.max_n, args.step, args.tol)
    if args.format == "csv":
        return 0, entry_records_to_csv(records)
    rows = [
        {"seed": r.seed, "N_touch": r.n_touch, "N_entry": r.n_entry, "min_eig_final": r.min_eig_final}
        for r in records
    ]
    entries = [r.n_entry for r in records if r.n_entry is not None]
    summary = {
        "entered": len(entries),
        "not_entered": len(records) - len(entries),
    }
    if entries:
        q1, med, q3 = np.percentile(entries, [25, 50, 75])
        summary.update(median=med, q1=q1, q3=q3)
    return 0, _payload(args, args.dim, max_n=args.max_n, step=args.step, summary=summary, records=rows)


def cmd_tomo_check(args):
    return 0, _payload(args, 2, **tomography_verdict(args.a, args.b))


def cmd_naimark_check(args):
    m = resolution_from_json(load_json(args.resolution))
    model = naimark_dilate(m)
    rng = np.random.default_rng(args.seed)
    prob_dev = state_dev = undephased_dev = 0.0
    for _ in range(args.trials):
        w = random_density_hs(m.dim, rng)
        direct = apply_channel(m, w)
        prob_dev = max(prob_dev, np.max(np.abs(model.probabilities(w) - probabilities(m, w))))
        state_dev = max(state_dev, np.max(np.abs(model.system_state(w) - direct)))
        undephased_dev = max(
            undephased_dev, np.max(np.abs(model.system_state(w, dephase=False) - direct))
        )
    return 0, _payload(
        args,
        m.dim,
        ancilla_dim=model.ancilla_dim,
        trials=args.trials,
        isometry_residual=model.isometry_residual(),
        max_probability_deviation=prob_dev,
        max_state_deviation=state_dev,
        max_undephased_state_deviation=undephased_dev,
        equivalent=bool(max(prob_dev, state_dev) < 1e-10),
    )


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    seed = _env_default("AFTERMEASURE_SEED", int, DEFAULT_SEED)
    tol = _env_default("AFTERMEASURE_TOL", float, DEFAULT_TOL)

    common = _Parser(add_help=False)
    common.add_argument("--tol", type=float, default=tol, help=f"tolerance (default {tol:g})")

    def seeded(p):
        p.add_argument("--seed", type=int, default=seed, help=f"RNG seed (default {seed})")

    parser = _Parser(prog="aftermeasure", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(group, name, func, help_):
        p = group.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    sic = sub.add_parser("sic", help="SIC-POVM fiducials").add_subparsers(
        dest="action", required=True, parser_class=_Parser
    )
    p = add(sic, "verify", cmd_sic_verify, "verify a built-in or archived fiducial")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--fiducial", help="fiducial archive JSON")
    p = add(sic, "find", cmd_sic_find, "numerical fiducial search, 2 <= d <= 6")
    p.add_argument("--dim", type=int, required=True)
    seeded(p)
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--max-iters", type=int, default=20000)
    p.add_argument("--output", help="write the fiducial archive JSON here")
    p = add(sic, "resolution", cmd_sic_resolution, "print the SIC resolution JSON")
    p.add_argument("--dim", type=int, required=True)
    seeded(p)

    p = add(sub, "volumes", cmd_volumes, "exact volumes and ratios")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--max-dim", type=int)
    p.add_argument("--format", choices=("json", "csv"), default="json")

    channel = sub.add_parser("channel", help="measurement channels").add_subparsers(
        dest="action", required=True, parser_class=_Parser
    )
    p = add(channel, "apply", cmd_channel_apply, "apply a resolution's channel to a state")
    p.add_argument("--resolution", required=True)
    p.add_argument("--state", required=True)

    p = add(sub, "membership", cmd_membership, "span / conv / V_am membership of a state")
    p.add_argument("--resolution", required=True)
    p.add_argument("--state", required=True)

    p = add(sub, "mc-volume", cmd_mc_volume, "Monte Carlo volume fraction for the SIC")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--region", choices=("vam", "conv"), required=True)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--workers", type=int, default=1)
    seeded(p)

    simulate = sub.add_parser("simulate", help="finite-ensemble simulation").add_subparsers(
        dest="action", required=True, parser_class=_Parser
    )
    p = add(simulate, "entry", cmd_simulate_entry, "first entry into V_am of the SIC")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--state", help="pre-measurement state JSON (default: maximally mixed)")
    p.add_argument("--max-n", type=int, default=10_000)
    p.add_argument("--step", type=int, default=1)
    p.add_argument("--trajectories", type=int, default=1)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    seeded(p)

    p = add(sub, "tomo-check", cmd_tomo_check, "two-basis qubit tomography consistency")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)

    naimark = sub.add_parser("naimark", help="Naimark dilation").add_subparsers(
        dest="action", required=True, parser_class=_Parser
    )
    p = add(naimark, "check", cmd_naimark_check, "compare dilated model with the direct channel")
    p.add_argument("--resolution", required=True)
    p.add_argument("--trials", type=int, default=100)
    seeded(p)
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        args.command_name = " ".join(filter(None, [args.command, getattr(args, "action", None)]))
        status, payload = args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return 1
    except ValidationError as exc:
        print(f"invalid input: {exc}", file=stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=stderr)
        return 3
    except AfterMeasureError as exc:  # pragma: no cover - no other subclasses today
        print(f"error: {exc}", file=stderr)
        return 2
    if isinstance(payload, str):
        stdout.write(payload)
    else:
        stdout.write(json.dumps(_clean(payload), indent=2) + "\n")
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
