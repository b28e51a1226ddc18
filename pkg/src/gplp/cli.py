"""Command-line interface: ``gplp synth | fit | filter | compare | band-energy``.

Exit codes: 0 success, 1 usage/parse/domain errors, 2 numerical failure.
"""

import argparse
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import experiments, io, signals
from .exceptions import ConditioningError, DomainError, FitError
from .gp import FitConfig, FitResult, fit, posterior
from .kernels import BandLimitedKernelSpec, Kernel, SEHyperparams

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

EXPERIMENT_DEFAULTS = {
    "freqs_low": list(signals.DEFAULT_FREQS_LOW),
    "freqs_high": list(signals.DEFAULT_FREQS_HIGH),
    "t_start": -100.0,
    "t_end": 100.0,
    "n_points": 5000,
    "fraction": experiments.DEFAULT_FRACTION,
    "mode": "even",
    "noise": experiments.DEFAULT_NOISE,
    "cutoff": experiments.DEFAULT_CUTOFF,
    "order": experiments.DEFAULT_ORDER,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_seed():
    env = os.environ.get("GPLP_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"GPLP_SEED must be an integer, got {env!r}") from None


def _resolve(args, names):
    """Fill unset experiment flags from the experiment defaults when requested."""
    missing = []
    for name in names:
        if getattr(args, name, None) is None:
            if args.paper_defaults:
                setattr(args, name, EXPERIMENT_DEFAULTS[name])
            else:
                missing.append("--" + name.replace("_", "-"))
    if missing:
        raise UsageError(f"missing {', '.join(missing)} (or pass --paper-defaults)")


def _seed(args):
    return _default_seed() if args.seed is None else args.seed


def _outdir(path):
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {path}: {exc}") from exc
    if not os.access(path, os.W_OK):
        raise OSError(f"output directory {path} is not writable")
    return path


def _load_fit(path):
    d = io.read_json(path)
    if "params" in d:
        return FitResult.from_dict(d)
    return FitResult(SEHyperparams.from_dict(d), nll=float("nan"), restarts_tried=0, converged=True)


def _default_grid(obs):
    # 4x the mean observation rate over the observation span
    n = 4 * (len(obs) - 1) + 1
    return np.linspace(obs.times[0], obs.times[-1], n)


def _parse_grid(text):
    try:
        start, stop, n = text.split(":")
        return np.linspace(float(start), float(stop), int(n))
    except ValueError:
        raise UsageError(f"--grid expects START:STOP:N, got {text!r}") from None


def cmd_synth(args):
    _resolve(args, ["freqs_low", "freqs_high", "t_start", "t_end", "n_points", "fraction", "mode", "noise"])
    spec = signals.LineSpectraSpec(tuple(args.freqs_low), tuple(args.freqs_high),
                                   args.t_start, args.t_end, args.n_points)
    clean, obs, truth = experiments.make_observations(spec, args.fraction, args.mode, args.noise, _seed(args))
    out = _outdir(args.out)
    for name, ts in (("clean.csv", clean), ("observations.csv", obs), ("truth_low.csv", truth)):
        print(io.write_series_csv(out / name, ts))
    return EXIT_OK


def cmd_fit(args):
    obs = io.read_series_csv(args.obs)
    if len(obs) < 3:
        raise UsageError(f"{args.obs}: fitting needs at least 3 rows, got {len(obs)}")
    result = fit(obs, FitConfig(n_restarts=args.restarts, seed=args.seed))
    io.write_json(args.out, result.to_dict())
    print(args.out)
    if not result.converged:
        print("warning: best restart stopped before meeting the tolerance", file=sys.stderr)
    return EXIT_OK


def cmd_filter(args):
    _resolve(args, ["cutoff"])
    if args.cutoff <= 0:
        raise DomainError(f"cutoff must be positive, got {args.cutoff}")
    obs = io.read_series_csv(args.obs)
    spec = BandLimitedKernelSpec(_load_fit(args.model).params, args.cutoff)
    if args.grid_from:
        grid = io.read_series_csv(args.grid_from).times
    elif args.grid:
        grid = _parse_grid(args.grid)
    else:
        grid = _default_grid(obs)
    component = Kernel(args.component)
    post = posterior(obs, grid, spec, component)
    io.write_posterior_csv(args.out, post)
    print(args.out)
    if args.json:
        io.write_json(args.json, {"spec": spec.to_dict(), **post.to_dict()})
    if args.spectrum:
        est = signals.fft_spectrum(signals.TimeSeries(grid, post.mean))
        print(io.write_spectrum_csv(args.spectrum, est))
    if args.verify:
        low = post if component is Kernel.LOW else posterior(obs, grid, spec, Kernel.LOW)
        high = post if component is Kernel.HIGH else posterior(obs, grid, spec, Kernel.HIGH)
        full = posterior(obs, grid, spec, Kernel.SE)
        err = float(np.max(np.abs(low.mean + high.mean - full.mean)))
        scale = max(1.0, float(np.max(np.abs(full.mean))))
        ok = err <= 1e-10 * scale
        print(f"verify: max |low + high - se| = {err:.3e} ({'ok' if ok else 'FAILED'})")
        if not ok:
            return EXIT_NUMERIC
    return EXIT_OK


def cmd_compare(args):
    _resolve(args, ["cutoff", "order"])
    obs = io.read_series_csv(args.obs)
    truth = io.read_series_csv(args.truth)
    fit_result = _load_fit(args.model) if args.model else None
    report, _, _ = experiments.compare(obs, truth, args.cutoff, args.order, fit_result,
                                       FitConfig(seed=args.seed))
    if args.out:
        io.write_json(args.out, report)
    for key in ("gplp_mse", "butterworth_mse", "gplp_coverage95"):
        print(f"{key}: {report[key]}")
    return EXIT_OK


def cmd_band_energy(args):
    ts = io.read_series(args.input, dt=args.dt)
    if not signals.is_uniform(ts.times):
        raise DomainError(
            f"{args.input} is unevenly sampled; run `gplp filter` onto a uniform grid first"
        )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ratio = signals.band_energy_ratio(ts, args.cutoff)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    print(f"{ratio:.6f}")
    if args.json:
        io.write_json(args.json, {
            "ratio": ratio,
            "cutoff_hz": args.cutoff,
            "policy": "series mean removed; DC bin counted in the low band; power = |FFT|^2",
            "n_samples": len(ts),
        })
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="gplp", description="Gaussian-process low-pass filtering")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate the line-spectra experiment data")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--freqs-low", type=float, nargs="+")
    p.add_argument("--freqs-high", type=float, nargs="+")
    p.add_argument("--t-start", type=float)
    p.add_argument("--t-end", type=float)
    p.add_argument("--n-points", type=int)
    p.add_argument("--fraction", type=float)
    p.add_argument("--mode", choices=["even", "random"])
    p.add_argument("--noise", type=float, help="observation noise std")
    p.add_argument("--seed", type=int, help="experiment seed (default: $GPLP_SEED or 0)")
    p.add_argument("--paper-defaults", action="store_true")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit", help="fit SE hyperparameters by maximum likelihood")
    p.add_argument("--obs", required=True)
    p.add_argument("--out", required=True, help="model JSON")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--seed", type=int, help="scramble the restart sequence")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("filter", help="posterior of the low (or high) frequency component")
    p.add_argument("--obs", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--cutoff", type=float, help="cutoff frequency b in Hz")
    p.add_argument("--out", required=True, help="posterior CSV")
    grid = p.add_mutually_exclusive_group()
    grid.add_argument("--grid", help="START:STOP:N uniform query grid (use --grid=START:... if START < 0)")
    grid.add_argument("--grid-from", help="take query times from a time,value CSV")
    p.add_argument("--component", choices=["low", "high"], default="low")
    p.add_argument("--spectrum", help="also write the FFT of the posterior mean here")
    p.add_argument("--json", help="also write the posterior as JSON")
    p.add_argument("--verify", action="store_true", help="check low + high = full SE posterior mean")
    p.add_argument("--paper-defaults", action="store_true")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("compare", help="GPLP vs Butterworth against a ground truth")
    p.add_argument("--obs", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--model", help="fitted model JSON (fits afresh when omitted)")
    p.add_argument("--cutoff", type=float)
    p.add_argument("--order", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="report JSON")
    p.add_argument("--paper-defaults", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("band-energy", help="fraction of power at or below a cutoff")
    p.add_argument("--input", required=True)
    p.add_argument("--cutoff", type=float, required=True)
    p.add_argument("--dt", type=float, help="sample spacing for single-column input files")
    p.add_argument("--json", help="also write the result as JSON")
    p.set_defaults(func=cmd_band_energy)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    # LinAlgError subclasses ValueError, so it must be caught first
    except (FitError, ConditioningError, np.linalg.LinAlgError) as exc:
        print(f"gplp {args.command}: numerical failure: {exc}", file=sys.stderr)
        if isinstance(exc, FitError) and exc.diagnostics:
            print(f"diagnostics: {exc.diagnostics}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ValueError, OSError) as exc:
        print(f"gplp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
