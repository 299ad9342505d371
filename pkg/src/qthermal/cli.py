"""Command-line surface: fidelity sweeps, discrimination bounds, classifier
simulations and temperature tables, all emitted as CSV with a manifest
sidecar.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric
non-convergence.  Output is deterministic: identical flags, input files and
seeds produce byte-identical CSVs.
"""

from __future__ import annotations

import argparse
import sys
import time
import warnings

import numpy as np

from . import __version__
from .bounds import ImageSpace, ProbeSpec, bounds, min_rel_probe_uniform
from .channels import (
    EnvironmentPair,
    fidelity_choi_inf,
    fidelity_classical,
    fidelity_finite,
    temperature_of,
)
from .classify import advantage_regions
from .cnn import NetworkSpec, TrainConfig, make_predictor, train
from .data import dataset_dir, load_idx_split, synthetic_digits
from .errors import ExtrapolationWarning, IdxFormatError, NonPhysicalChannelError

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NONCONVERGENCE = 4


def _fmt(x) -> str:
    """Round-trip decimal formatting for CSV cells."""
    if isinstance(x, float) or isinstance(x, np.floating):
        return repr(float(x))
    return str(x)


def _emit(rows: list[str], manifest: list[str], out_path: str | None) -> None:
    text = "\n".join(rows) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        with open(out_path + ".manifest", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(manifest) + "\n")
    else:
        sys.stdout.write(text)
        sys.stderr.write("\n".join(manifest) + "\n")


def _manifest(args: argparse.Namespace, extra: dict | None = None) -> list[str]:
    skip = {"func", "_t0"}
    lines = [
        f"command: {args.command}",
        f"version: {__version__}",
    ]
    for key in sorted(vars(args)):
        if key in skip or key == "command":
            continue
        lines.append(f"param {key}: {getattr(args, key)}")
    for key, val in (extra or {}).items():
        lines.append(f"{key}: {val}")
    lines.append(f"wall_time_s: {time.time() - args._t0:.3f}")
    return lines


def _parse_grid(text: str) -> list[float]:
    """Comma list `a,b,c` or range `start:stop:step` (inclusive stop)."""
    if ":" in text:
        start, stop, step = (float(p) for p in text.split(":"))
        if step <= 0:
            raise ValueError("grid step must be positive")
        vals = []
        v = start
        while v <= stop + 1e-12:
            vals.append(v)
            v += step
        return vals
    return [float(p) for p in text.split(",") if p]


def _pair_from_args(args) -> EnvironmentPair:
    if args.kind == "additive":
        if args.nuT is None or args.nuB is None:
            raise ValueError("additive channels require --nuT and --nuB")
        return EnvironmentPair.additive(args.nuB, args.nuT)
    if args.tau is None or args.epsT is None or args.epsB is None:
        raise ValueError("thermal channels require --tau, --epsT and --epsB")
    return EnvironmentPair.thermal(args.tau, args.epsB, args.epsT)


def _add_channel_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", choices=("thermal", "additive"), required=True,
                   help="thermal covers loss (tau<1) and amplifier (tau>1) channels")
    p.add_argument("--tau", type=float, help="common transmissivity/gain")
    p.add_argument("--epsT", type=float, help="target thermal parameter nbar+1/2")
    p.add_argument("--epsB", type=float, help="background thermal parameter nbar+1/2")
    p.add_argument("--nuT", type=float, help="target additive noise")
    p.add_argument("--nuB", type=float, help="background additive noise")


def cmd_fidelity(args) -> int:
    pair = _pair_from_args(args)
    grid = sorted(set(_parse_grid(args.a)) | {0.5})
    rows = ["a,F"]
    for a in grid:
        rows.append(f"{_fmt(a)},{_fmt(fidelity_finite(pair, a))}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        f_inf = fidelity_choi_inf(pair)
    rows.append(f"inf,{_fmt(f_inf)}")
    _emit(rows, _manifest(args), args.out)
    if any(issubclass(w.category, ExtrapolationWarning) for w in caught):
        return EXIT_NONCONVERGENCE
    return 0


def cmd_bounds(args) -> int:
    pair = _pair_from_args(args)
    if args.space == "uniform":
        space = ImageSpace.uniform(args.m)
    elif args.space == "cpf":
        if args.k is None:
            raise ValueError("CPF spaces require --k")
        space = ImageSpace.cpf(args.m, int(float(args.k)))
    else:
        if args.k is None:
            raise ValueError("BCPF spaces require --k as a comma list")
        space = ImageSpace.bcpf(args.m, [int(float(v)) for v in args.k.split(",")])

    M_grid = [int(v) for v in _parse_grid(args.M)]
    if not M_grid:
        raise ValueError("empty probe copy grid")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        f_cl = fidelity_classical(pair)
        probe = ProbeSpec(copies=min(M_grid), energy=args.energy, a=args.a)
        f_q = probe.quantum_fidelity(pair)
    rows = ["M,q_lower,q_upper,cl_lower,mga,mpa"]
    for M in M_grid:
        rep = bounds(space, int(M), f_q, f_cl)
        rows.append(
            ",".join(
                _fmt(v)
                for v in (int(M), rep.q_lower, rep.q_upper, rep.cl_lower, rep.mga, rep.mpa)
            )
        )
    rows.append(f"# mbar_adv = {_fmt(min_rel_probe_uniform(f_q, f_cl))}")
    _emit(rows, _manifest(args, {"F_q": f_q, "F_cl": f_cl}), args.out)
    if any(issubclass(w.category, ExtrapolationWarning) for w in caught):
        return EXIT_NONCONVERGENCE
    return 0


def _load_datasets(args):
    directory = dataset_dir(args.data_dir)
    if directory:
        training = load_idx_split(directory, "training", args.threshold, limit=args.T)
        evaluation = load_idx_split(directory, "evaluation", args.threshold, limit=args.eval_size)
        return training, evaluation
    training = synthetic_digits(args.T, args.seed, split="training")
    evaluation = synthetic_digits(args.eval_size, args.seed + 1, split="evaluation")
    sys.stderr.write(
        "note: no dataset directory given, using the synthetic digit set\n"
    )
    return training, evaluation


def cmd_simulate(args) -> int:
    pair = _pair_from_args(args)
    training, evaluation = _load_datasets(args)
    M_grid = [int(v) for v in _parse_grid(args.M)]

    predictor_factory = None
    if args.classifier == "cnn":
        net = NetworkSpec(input_shape=(training.height, training.width),
                          classes=max(training.num_classes, evaluation.num_classes))
        config = TrainConfig(
            learning_rate=args.lr,
            batch_size=args.batch_size,
            epochs=args.epochs,
            seed=args.seed,
        )

        def predictor_factory(noise, M):
            result = train(net, training, noise, config)
            return make_predictor(net, result.params)

    rows = [
        "M,p_cl_low,p_cl_up,p_q_low,p_q_up,E_cl_L,E_cl_U,E_q_L,E_q_U,dE_min,dE_max,stderr_max"
    ]
    table = advantage_regions(
        training,
        evaluation,
        pair,
        M_grid,
        trials=args.trials,
        master_seed=args.seed,
        threads=args.threads,
        predictor_factory=predictor_factory,
        p_override=args.p_override,
    )
    for row in table:
        rows.append(
            ",".join(
                _fmt(v)
                for v in (
                    row.M,
                    row.p_cl_low,
                    row.p_cl_up,
                    row.p_q_low,
                    row.p_q_up,
                    row.e_cl_low.mean,
                    row.e_cl_up.mean,
                    row.e_q_low.mean,
                    row.e_q_up.mean,
                    row.de_min,
                    row.de_max,
                    row.stderr_max,
                )
            )
        )
    digests = training.provenance.get("source", {})
    _emit(rows, _manifest(args, {"input_digests": digests}), args.out)
    return 0


def cmd_temp(args) -> int:
    if (args.nbar is None) == (args.eps is None):
        raise ValueError("give exactly one of --nbar or --eps")
    if args.eps is not None:
        nbars = [e - 0.5 for e in _parse_grid(args.eps)]
    else:
        nbars = _parse_grid(args.nbar)
    rows = ["nbar,T_K,T_C"]
    for nb in nbars:
        t_k = temperature_of(nb, args.wavelength)
        rows.append(f"{_fmt(nb)},{_fmt(t_k)},{_fmt(t_k - 273.15)}")
    _emit(rows, _manifest(args), args.out)
    return 0


def _apply_config_file(argv: list[str]) -> list[str]:
    """Prepend key=value lines from --config as defaults; explicit flags win."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx == 0 or idx + 1 >= len(argv):
        return argv
    path = argv[idx + 1]
    pre = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            pre.extend([f"--{key.strip()}", val.strip()])
    head, tail = argv[:1], argv[1:]
    del tail[idx - 1 : idx + 1]
    return head + pre + tail


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qthermal",
        description="bounds and simulations for thermal-image channel discrimination",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fidelity", help="probe-state fidelity against squeezing")
    _add_channel_flags(p)
    p.add_argument("--a", default="0.5,2.5,10,100", help="squeezing grid (list or start:stop:step)")
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("bounds", help="error-probability bounds over a probe grid")
    _add_channel_flags(p)
    p.add_argument("--space", choices=("uniform", "cpf", "bcpf"), default="uniform")
    p.add_argument("--m", type=int, required=True, help="pixel count")
    p.add_argument("--k", help="target count (cpf) or comma list (bcpf)")
    p.add_argument("--M", required=True, help="probe copies grid (list or start:stop:step)")
    p.add_argument("--energy", choices=("asymptotic", "classical", "finite"), default="asymptotic")
    p.add_argument("--a", type=float, default=10.0, help="squeezing for --energy finite")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("simulate", help="classifier error regions on noisy images")
    _add_channel_flags(p)
    p.add_argument("--classifier", choices=("nn", "cnn"), default="nn")
    p.add_argument("--M", required=True, help="probe copies grid")
    p.add_argument("--T", type=int, default=10000, help="training set size")
    p.add_argument("--eval-size", type=int, default=250, dest="eval_size")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--threshold", type=int, default=128, help="binarisation threshold")
    p.add_argument("--data-dir", dest="data_dir", help="IDX dataset directory (or set QTHERMAL_DATASET_DIR)")
    p.add_argument("--p-override", dest="p_override", type=float, help="force one flip probability")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--epochs", type=int, default=3, help="cnn training epochs")
    p.add_argument("--batch-size", dest="batch_size", type=int, default=64)
    p.add_argument("--lr", type=float, default=0.05, help="cnn learning rate")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("temp", help="occupation to temperature table")
    p.add_argument("--wavelength", type=float, default=1e-3, help="probe wavelength in meters")
    p.add_argument("--nbar", help="occupation list")
    p.add_argument("--eps", help="thermal parameter list (nbar + 1/2)")
    p.set_defaults(func=cmd_temp)

    for sp in sub.choices.values():
        sp.add_argument("--out", help="CSV output path (manifest written alongside)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--config", help="key=value defaults file; flags take precedence")
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(argv)
    except OSError as exc:
        parser.exit(EXIT_USAGE, f"error: cannot read config file: {exc}\n")
    args = parser.parse_args(argv)
    args._t0 = time.time()
    try:
        return args.func(args)
    except (ValueError, NonPhysicalChannelError) as exc:
        if isinstance(exc, IdxFormatError):
            sys.stderr.write(f"data error: {exc}\n")
            return EXIT_DATA
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except FileNotFoundError as exc:
        sys.stderr.write(f"data error: {exc}\n")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
