"""Command-line front end.

Subcommands: decompose, select, bootstrap, simulate, align, fluctuation.
Panels are CSV files with a header row; an optional leading "time" (or
"t") column carries time stamps, which are affinely rescaled to [0, 1]
on ingestion. All numeric output uses 12 significant digits so files
round-trip bit-exactly through re-ingestion.

Exit codes: 0 success, 1 usage error, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .basis import BasisFamily, BasisSpec, build_orthonormal
from .dpalign import DpConfig, dp_align
from .estimator import (
    EstimatorConfig,
    decompose,
    select_subspace,
    separation_cost,
    separation_model,
)
from .gridfn import Grid, GridFunction, resample_to_grid
from .inference import BootstrapConfig, bootstrap
from .synthgen import ScenarioSpec, fluctuation, generate
from .warping import identity_warping

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3

FMT = "%.12g"
TIME_HEADERS = {"time", "t"}

FAMILIES = {
    "fourier": BasisFamily.FOURIER,
    "sine": BasisFamily.SINE,
    "cosine": BasisFamily.COSINE,
    "legendre": BasisFamily.SHIFTED_LEGENDRE,
}


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(x: float) -> str:
    return FMT % x


def _write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([_fmt(v) for v in row])


def _write_function_csv(path: Path, name: str, f: GridFunction) -> None:
    _write_csv(path, ["time", name], [f.grid.points, f.values])


def read_panel(path: Path, m: int | None = None):
    """Read a panel CSV into per-observation GridFunctions.

    Returns (functions, observation names, original time range).
    """
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if len(rows) < 3:
        raise InputError(f"{path}: need a header row and at least 2 data rows")
    header = [h.strip() for h in rows[0]]
    try:
        data = np.array([[float(c) for c in row] for row in rows[1:]])
    except ValueError as exc:
        raise InputError(f"{path}: non-numeric cell ({exc})") from exc
    if data.ndim != 2 or data.shape[1] != len(header):
        raise InputError(f"{path}: ragged rows")

    if header[0].lower() in TIME_HEADERS:
        times = data[:, 0]
        obs = data[:, 1:]
        names = header[1:]
    else:
        times = np.arange(data.shape[0], dtype=float)
        obs = data
        names = header
    if obs.shape[1] < 2:
        raise InputError(f"{path}: need at least 2 observations (columns)")
    if np.any(np.diff(times) <= 0):
        raise InputError(f"{path}: time column must be strictly increasing")

    grid = Grid.uniform(m if m is not None else len(times))
    fs = [resample_to_grid(obs[:, j], times, grid) for j in range(obs.shape[1])]
    return fs, names, (float(times[0]), float(times[-1]))


def _read_series(path: Path):
    """Single numeric series: last column of a headered CSV."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if len(rows) < 2:
        raise InputError(f"{path}: empty series")
    try:
        return np.array([float(row[-1]) for row in rows[1:]])
    except ValueError as exc:
        raise InputError(f"{path}: non-numeric cell ({exc})") from exc


CONFIG_KEYS = {
    "basis", "l", "l_range", "max_iter", "lattice", "replicates",
    "alpha", "seed", "model", "out", "plots",
}


def _load_config_file(path: str) -> dict:
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected key=value")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in CONFIG_KEYS:
            raise InputError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = value.strip()
    return values


# defaults applied only after config-file merging, so that a file value
# wins over an unset flag but an explicit flag always wins over the file
ARG_DEFAULTS = {
    "basis": "cosine", "l": 3, "max_iter": 20, "seed": 0, "model": "mle",
    "out": "out", "replicates": 500, "alpha": 0.05, "l_range": "1..10",
}


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    if getattr(args, "config", None):
        file_values = _load_config_file(args.config)
        casts = {
            "l": int, "max_iter": int, "lattice": int, "replicates": int,
            "seed": int, "alpha": float, "plots": lambda v: v.lower() in ("1", "true", "yes"),
        }
        for key, raw in file_values.items():
            if getattr(args, key, None) in (None, False):
                setattr(args, key, casts.get(key, str)(raw))
    for key, default in ARG_DEFAULTS.items():
        if getattr(args, key, "sentinel") is None:
            setattr(args, key, default)
    return args


def _parse_l_range(text: str) -> list[int]:
    if ".." in text:
        lo, _, hi = text.partition("..")
        try:
            lo, hi = int(lo), int(hi)
        except ValueError as exc:
            raise UsageError(f"bad l-range {text!r}") from exc
        if hi < lo:
            raise UsageError(f"bad l-range {text!r}")
        return list(range(lo, hi + 1))
    try:
        return [int(text)]
    except ValueError as exc:
        raise UsageError(f"bad l-range {text!r}") from exc


def _estimator_config(args: argparse.Namespace, l: int) -> EstimatorConfig:
    family = FAMILIES[args.basis]
    dp = DpConfig(lattice_size=args.lattice) if args.lattice else DpConfig()
    return EstimatorConfig(
        basis=BasisSpec(family=family, l=l, l_max=max(20, l)),
        max_iter=args.max_iter,
        dp=dp,
    )


def _write_warpings_csv(path: Path, warpings, names) -> None:
    grid = warpings[0].grid
    header = ["time"] + list(names)
    cols = [grid.points] + [w.values for w in warpings]
    _write_csv(path, header, cols)


def _write_summary(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _maybe_plot_decomposition(out: Path, fs, result, names) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    grid = fs[0].grid
    panels = [
        ("observations.svg", lambda ax: [ax.plot(grid.points, f.values, lw=0.7) for f in fs]),
        ("trend.svg", lambda ax: ax.plot(grid.points, result.h_hat.values)),
        ("seasonality.svg", lambda ax: ax.plot(grid.points, result.g_hat.values)),
        ("warpings.svg", lambda ax: [ax.plot(grid.points, w.values, lw=0.7) for w in result.warpings]),
    ]
    for fname, draw in panels:
        fig, ax = plt.subplots(figsize=(4, 3))
        draw(ax)
        ax.set_xlabel("t")
        fig.tight_layout()
        fig.savefig(out / fname)
        plt.close(fig)
    fig, ax = plt.subplots(figsize=(4, 3))
    ax.semilogy(np.arange(1, len(result.cost_trace) + 1), result.cost_trace)
    ax.set_xlabel("iteration")
    ax.set_ylabel("cost")
    fig.tight_layout()
    fig.savefig(out / "cost_trace.svg")
    plt.close(fig)


def _maybe_plot_bands(out: Path, summary) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    for name, mean, low, high in [
        ("band_h.svg", summary.h_mean, summary.band_h_low, summary.band_h_high),
        ("band_g.svg", summary.g_mean, summary.band_g_low, summary.band_g_high),
    ]:
        t = mean.grid.points
        fig, ax = plt.subplots(figsize=(4, 3))
        ax.fill_between(t, low.values, high.values, alpha=0.3)
        ax.plot(t, mean.values)
        ax.set_xlabel("t")
        fig.tight_layout()
        fig.savefig(out / name)
        plt.close(fig)


def cmd_decompose(args) -> int:
    fs, names, time_range = read_panel(Path(args.panel))
    out = Path(args.out)
    if args.model == "separation":
        basis = build_orthonormal(
            BasisSpec(family=FAMILIES[args.basis], l=args.l, l_max=max(20, args.l)),
            fs[0].grid,
        )
        h, g = separation_model(fs, basis)
        final = separation_cost(fs)
        warpings = [identity_warping(fs[0].grid) for _ in fs]
        trace = np.array([final])
        sigma = float(np.sqrt(final))
    else:
        cfg = _estimator_config(args, args.l)
        result = decompose(fs, cfg)
        h, g, warpings = result.h_hat, result.g_hat, result.warpings
        final, trace, sigma = result.neg_log_likelihood, result.cost_trace, result.sigma_hat

    _write_function_csv(out / "h_hat.csv", "h_hat", h)
    _write_function_csv(out / "g_hat.csv", "g_hat", g)
    _write_warpings_csv(out / "warpings.csv", warpings, names)
    _write_csv(out / "cost_trace.csv", ["iteration", "cost"],
               [np.arange(1, len(trace) + 1, dtype=float), trace])
    _write_summary(out / "summary.json", {
        "command": "decompose",
        "model": args.model,
        "basis": args.basis,
        "l": args.l,
        "sigma_hat": sigma,
        "final_cost": final,
        "n_observations": len(fs),
        "grid_m": fs[0].grid.m,
        "time_range": list(time_range),
    })
    if args.plots:
        from types import SimpleNamespace

        view = SimpleNamespace(h_hat=h, g_hat=g, warpings=warpings, cost_trace=trace)
        _maybe_plot_decomposition(out, fs, view, names)
    return EXIT_OK


def cmd_select(args) -> int:
    fs, names, time_range = read_panel(Path(args.panel))
    out = Path(args.out)
    ls = _parse_l_range(args.l_range)

    if args.model == "separation":
        costs = []
        for l in ls:
            build_orthonormal(
                BasisSpec(family=FAMILIES[args.basis], l=l, l_max=max(20, l)), fs[0].grid
            )
            costs.append(separation_cost(fs))
        _write_csv(out / "selection.csv", ["l", "neg_log_likelihood"],
                   [np.asarray(ls, dtype=float), np.asarray(costs)])
        _write_summary(out / "summary.json", {
            "command": "select", "model": "separation", "basis": args.basis,
            "l_range": ls, "selected_l": None,
            "reason": "separation-model likelihood is invariant to the subspace; "
                      "auto-selection is not meaningful",
        })
        print("separation model: residual cost does not depend on l; refusing to auto-select")
        return EXIT_OK

    cfg = _estimator_config(args, ls[0])
    selected, results = select_subspace(fs, FAMILIES[args.basis], ls, cfg)
    _write_csv(out / "selection.csv", ["l", "neg_log_likelihood"],
               [np.asarray(ls, dtype=float),
                np.asarray([r.neg_log_likelihood for r in results])])
    for l, r in zip(ls, results):
        sub = out / f"l_{l:02d}"
        _write_function_csv(sub / "h_hat.csv", "h_hat", r.h_hat)
        _write_function_csv(sub / "g_hat.csv", "g_hat", r.g_hat)
        _write_warpings_csv(sub / "warpings.csv", r.warpings, names)
        _write_csv(sub / "cost_trace.csv", ["iteration", "cost"],
                   [np.arange(1, len(r.cost_trace) + 1, dtype=float), r.cost_trace])
    _write_summary(out / "summary.json", {
        "command": "select", "model": "mle", "basis": args.basis,
        "l_range": ls, "selected_l": selected,
        "time_range": list(time_range),
    })
    if args.plots:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(4, 3))
        ax.semilogy(ls, [r.neg_log_likelihood for r in results], "o-")
        ax.set_xlabel("l")
        ax.set_ylabel("minimized cost")
        fig.tight_layout()
        fig.savefig(out / "selection.svg")
        plt.close(fig)
    print(f"selected l = {selected}")
    return EXIT_OK


def cmd_bootstrap(args) -> int:
    fs, names, _ = read_panel(Path(args.panel))
    out = Path(args.out)
    cfg = _estimator_config(args, args.l)
    if args.replicates < 10:
        print(f"warning: B={args.replicates} replicates; se_B will be unreliable",
              file=sys.stderr)
    bcfg = BootstrapConfig(B=args.replicates, alpha=args.alpha, seed=args.seed)
    summary = bootstrap(fs, cfg, bcfg)

    t = fs[0].grid.points
    _write_csv(out / "bands_h.csv", ["time", "low", "mean", "high"],
               [t, summary.band_h_low.values, summary.h_mean.values, summary.band_h_high.values])
    _write_csv(out / "bands_g.csv", ["time", "low", "mean", "high"],
               [t, summary.band_g_low.values, summary.g_mean.values, summary.band_g_high.values])
    with open(out / "tests.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["test", "statistic", "se_B", "p_value"])
        for name, res in summary.stats.items():
            writer.writerow([name, _fmt(res.statistic), _fmt(res.se_B), _fmt(res.p_value)])
    _write_summary(out / "summary.json", {
        "command": "bootstrap", "basis": args.basis, "l": args.l,
        "replicates": args.replicates, "alpha": args.alpha, "seed": args.seed,
        "failed_replicates": summary.n_failed,
        "tests": {name: {"statistic": r.statistic, "se_B": r.se_B, "p_value": r.p_value}
                  for name, r in summary.stats.items()},
    })
    if args.plots:
        _maybe_plot_bands(out, summary)
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec = ScenarioSpec(name=args.scenario, n=args.n, m=args.m,
                        sigma=args.sigma, seed=args.seed)
    fs, truth = generate(spec)
    out = Path(args.out)
    names = [f"obs_{i + 1}" for i in range(len(fs))]
    t = fs[0].grid.points
    _write_csv(out / "panel.csv", ["time"] + names, [t] + [f.values for f in fs])
    _write_function_csv(out / "truth_h.csv", "h", truth.h)
    _write_function_csv(out / "truth_g.csv", "g", truth.g)
    _write_warpings_csv(out / "truth_warpings.csv", truth.warpings, names)
    _write_summary(out / "summary.json", {
        "command": "simulate", "scenario": spec.name, "n": spec.n, "m": spec.m,
        "sigma": spec.sigma, "seed": spec.seed,
    })
    return EXIT_OK


def cmd_align(args) -> int:
    fs, names, _ = read_panel(Path(args.pair))
    if len(fs) != 2:
        raise InputError(f"{args.pair}: align expects exactly two observation columns")
    q, r = fs
    dp = DpConfig(lattice_size=args.lattice) if args.lattice else DpConfig()
    gamma, attained = dp_align(q, r, dp)
    out = Path(args.out)
    _write_csv(out / "warping.csv", ["time", "gamma"], [q.grid.points, gamma.values])
    _write_summary(out / "summary.json", {
        "command": "align", "columns": names, "cost": attained,
    })
    print(f"alignment cost = {attained:.6g}")
    return EXIT_OK


def cmd_fluctuation(args) -> int:
    rates = _read_series(Path(args.rates))
    try:
        tau = fluctuation(rates)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    out = Path(args.out)
    _write_csv(out / "fluctuation.csv", ["step", "tau_percent"],
               [np.arange(1, len(tau) + 1, dtype=float), tau])
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser, *, needs_l: bool = True) -> None:
    p.add_argument("--basis", choices=sorted(FAMILIES), default=None)
    if needs_l:
        p.add_argument("--l", type=int, default=None, help="trend subspace dimension")
    p.add_argument("--max-iter", dest="max_iter", type=int, default=None)
    p.add_argument("--lattice", type=int, default=None, help="DP lattice size")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--model", choices=["mle", "separation"], default=None)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--plots", action="store_true", help="emit SVG plots")
    p.add_argument("--config", default=None, help="key=value config file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trendwarp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="estimate trend, seasonality, and warpings")
    p.add_argument("panel")
    _add_common(p)
    p.set_defaults(fn=cmd_decompose)

    p = sub.add_parser("select", help="choose the trend subspace dimension")
    p.add_argument("panel")
    p.add_argument("--l-range", dest="l_range", default=None)
    _add_common(p, needs_l=False)
    p.set_defaults(fn=cmd_select)

    p = sub.add_parser("bootstrap", help="confidence bands and hypothesis tests")
    p.add_argument("panel")
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    _add_common(p)
    p.set_defaults(fn=cmd_bootstrap)

    p = sub.add_parser("simulate", help="generate a synthetic panel")
    p.add_argument("--scenario", choices=["fig1", "subspace_selection", "noise_perturbation"],
                   required=True)
    p.add_argument("--n", type=int, default=30)
    p.add_argument("--m", type=int, default=200)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("align", help="DP-align one function onto another")
    p.add_argument("pair", help="CSV with two observation columns (q, r)")
    p.add_argument("--lattice", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(fn=cmd_align)

    p = sub.add_parser("fluctuation", help="convert a rate series to percent fluctuations")
    p.add_argument("rates", help="CSV with the rate series in its last column")
    p.add_argument("--out", default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(fn=cmd_fluctuation)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args = _merge_config(args)
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
