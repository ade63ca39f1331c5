"""Command-line interface.

Every command prints JSON (sorted keys, round-trip floats) to stdout or to
``--out``.  Exit codes: 0 ok, 1 a requested check failed, 2 bad input or
configuration, 3 search budget exceeded, 4 bound not applicable, 5 invalid
ambiguity spec.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import ambiguity as amb
from . import experiments as ex
from . import filterbank as fbk
from . import graph as gr
from . import kernel_cheeger as kc
from . import serialize as ser
from . import transform as tr
from .errors import InapplicableBoundError, LabError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

# flag name -> default, shared by all subcommands and by --config files
DEFAULTS = {
    "bank": "shannon:16",
    "signal": "random",
    "field": None,
    "strategy": "exhaustive",
    "budget": None,
    "tol": 1e-10,
    "seed": ex.DEFAULT_SEED,
    "threads": 1,
    "out": None,
    "mode": "kernel",
    "require": "calderon",
    "bound": "auto",
    "coefficients": None,
    "parts": None,
    "signs": None,
    "spec": None,
    "shifts": None,
    "size": 256,
    "eps": 0.05,
    "overlap": 0.25,
    "format": "json",
}


class ConfigError(Exception):
    pass


def _parse_label(token: str):
    token = token.strip()
    try:
        return int(token)
    except ValueError:
        return token


def make_bank(spec: str, field: str | None, seed: int) -> fbk.FilterBank:
    """Builder spec ``name:param:...`` or a path to a bank JSON file."""
    path = Path(spec)
    if path.suffix == ".json" or path.exists():
        try:
            return ser.bank_from_dict(json.loads(path.read_text()))
        except (OSError, json.JSONDecodeError, KeyError) as err:
            raise ConfigError(f"cannot read bank {spec}: {err}") from err
    name, *params = spec.split(":")
    try:
        if name == "shannon":
            return fbk.build_shannon(int(params[0]), with_lowpass="nolow" not in params[1:])
        if name == "overlapping":
            eps = float(params[1]) if len(params) > 1 else 0.25
            return fbk.build_overlapping_shannon(int(params[0]), eps, plain_sum="plain" in params[2:])
        if name == "random":
            n, count = int(params[0]), int(params[1])
            return fbk.random_bank(n, count, np.random.default_rng(seed), field or "complex")
        if name == "zero":
            n = int(params[0])
            count = int(params[1]) if len(params) > 1 else 1
            return fbk.FilterBank(np.zeros((count, n)), np.ones(count), tuple(range(count)), "real")
    except (IndexError, ValueError) as err:
        if isinstance(err, LabError):
            raise
        raise ConfigError(f"bad bank spec {spec!r}: {err}") from err
    raise ConfigError(f"unknown bank builder {name!r}")


def make_signal(spec: str, bank: fbk.FilterBank, field: str | None, seed: int) -> np.ndarray:
    """Generator spec or a path to a JSON / CSV signal file."""
    n = bank.n
    real = (field or bank.field) == "real"
    name, _, arg = spec.partition(":")
    if name == "random":
        rng = np.random.default_rng(seed)
        f = rng.standard_normal(n)
        return f if real else f + 1j * rng.standard_normal(n)
    if name == "bump":
        return ex.localized_bump(n)
    if name == "filters":
        labels = [_parse_label(t) for t in arg.split(",") if t.strip()]
        f = sum(bank.filter(lab) for lab in labels)
        return np.asarray(f)
    if name == "delta":
        out = np.zeros(n)
        out[int(arg or 0) % n] = 1.0
        return out
    if name == "zero":
        return np.zeros(n)
    path = Path(spec)
    try:
        values = ser.read_signal(path)
    except (OSError, ValueError, json.JSONDecodeError) as err:
        raise ConfigError(f"cannot read signal {spec}: {err}") from err
    if values.shape[0] != n:
        raise ConfigError(f"signal has length {values.shape[0]}, bank order is {n}")
    if real:
        if np.any(values.imag):
            raise ConfigError("real field requested but the signal has imaginary parts")
        return values.real
    if field is None and not np.any(values.imag):
        return values.real
    return values


def _emit(args, payload, lines=False):
    if lines:
        text = "".join(ser.dumps(rec) + "\n" for rec in payload)
    else:
        text = ser.dumps(payload) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _setup(args):
    bank = make_bank(args.bank, args.field, args.seed)
    return bank


def cmd_check(args) -> int:
    bank = _setup(args)
    cal = fbk.check_calderon(bank, args.tol)
    si = fbk.check_spectral_injectivity(bank)
    payload = {
        "n": bank.n,
        "labels": list(bank.labels),
        "calderon": cal.to_dict(),
        "spectral_injectivity": si.to_dict(),
    }
    _emit(args, payload)
    need_c = args.require in ("calderon", "both")
    need_si = args.require in ("si", "both")
    failed = (need_c and not cal.satisfied) or (need_si and not si.full_rank)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_transform(args) -> int:
    bank = _setup(args)
    f = make_signal(args.signal, bank, args.field, args.seed)
    F = tr.analyze(bank, f)
    back = tr.synthesize(bank, F)
    nf = float(np.linalg.norm(f))
    payload = {
        "coefficients": ser.field_to_dict(F),
        "signal_norm": nf,
        "field_norm": F.norm(),
        "inversion_residual": float(np.linalg.norm(back - f) / nf) if nf else 0.0,
    }
    _emit(args, payload)
    return EXIT_OK


def _coefficients(args, bank):
    if args.coefficients:
        try:
            data = json.loads(Path(args.coefficients).read_text())
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read coefficients: {err}") from err
        return None, ser.field_from_dict(data, bank.nu)
    f = make_signal(args.signal, bank, args.field, args.seed)
    return f, tr.analyze(bank, f)


def cmd_cheeger(args) -> int:
    bank = _setup(args)
    if args.mode == "graph":
        f = make_signal(args.signal, bank, args.field, args.seed)
        G = gr.build_graph(bank, f, args.tol)
        res = gr.graph_cheeger(G, args.strategy, args.budget, args.seed)
        payload = res.to_dict()
        payload["graph"] = ser.graph_to_dict(G)
        if res.witness is not None:
            payload["witness_labels"] = [lab for lab, on in zip(G.labels, res.witness) if on]
    else:
        _, F = _coefficients(args, bank)
        res = kc.kernel_cheeger(bank, F, args.strategy, args.budget, args.seed)
        payload = res.to_dict()
    payload["mode"] = args.mode
    payload["seed"] = args.seed
    _emit(args, payload)
    return EXIT_OK


def cmd_bounds(args) -> int:
    bank = _setup(args)
    f = make_signal(args.signal, bank, args.field, args.seed)
    field = "real" if bank.field == "real" and not np.iscomplexobj(f) else "complex"
    if args.bound == "real" and field != "real":
        raise InapplicableBoundError("the real upper bound needs a real bank and a real signal")
    rep = ex.empirical_stability(bank, f, budget=args.budget or 64, seed=args.seed)
    payload = rep.to_dict()
    if rep.lower_bound == math.inf:
        payload["verdict"] = "not stably retrievable"
    elif rep.upper_bound < math.inf:
        payload["verdict"] = "stable"
    else:
        payload["verdict"] = "undetermined"
    _emit(args, payload)
    return EXIT_OK


def _load_spec(args):
    if args.spec:
        try:
            return ser.spec_from_dict(json.loads(Path(args.spec).read_text()))
        except (OSError, json.JSONDecodeError, KeyError) as err:
            raise ConfigError(f"cannot read spec: {err}") from err
    if args.parts is None or args.signs is None:
        raise ConfigError("ambiguity needs --spec or both --parts and --signs")
    try:
        parts = json.loads(args.parts) if isinstance(args.parts, str) else args.parts
        signs = json.loads(args.signs) if isinstance(args.signs, str) else args.signs
    except json.JSONDecodeError as err:
        raise ConfigError(f"cannot parse parts/signs: {err}") from err
    return ser.spec_from_dict({"parts": parts, "signs": signs})


def cmd_ambiguity(args) -> int:
    bank = _setup(args)
    f = make_signal(args.signal, bank, args.field, args.seed)
    spec = _load_spec(args)
    g = amb.synthesize_ambiguity(bank, f, spec)
    F, G = tr.analyze(bank, f), tr.analyze(bank, g)
    field = "real" if not np.iscomplexobj(g) and not np.iscomplexobj(f) else "complex"
    nf = float(np.linalg.norm(f))
    gap = float(np.sqrt(tr.field_norm_sq(np.abs(F.values) - np.abs(G.values), bank.nu)))
    payload = {
        "signal": ser.pairs(g),
        "spec": spec.to_dict(),
        "modulus_gap": gap,
        "relative_modulus_gap": gap / nf if nf else 0.0,
        "distance": amb.phase_distance(f, g, field),
        "moduli_match": bool(gap <= 1e-9 * nf),
    }
    _emit(args, payload)
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.bank == DEFAULTS["bank"]:
        bank = fbk.build_overlapping_shannon(args.size, args.overlap)
    else:
        bank = _setup(args)
    if args.shifts is None:
        shifts = [0] + [2**k for k in range(int(math.log2(bank.n)))]
    else:
        shifts = [int(s) for s in str(args.shifts).split(",") if s.strip()]
    if args.signal in ("random", "bump"):
        h = ex.localized_bump(bank.n)
    else:
        h = make_signal(args.signal, bank, args.field, args.seed)
    records = ex.separation_sweep(bank, h, shifts, budget=args.budget or 8, seed=args.seed, threads=args.threads)
    if args.format == "csv":
        text = "shift,kernel_cheeger,graph_cheeger,quotient_bound\n" + "".join(
            f"{r['shift']},{r['kernel_cheeger']!r},{r['graph_cheeger']!r},{r['quotient_bound']!r}\n" for r in records
        )
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    else:
        _emit(args, records, lines=True)
    return EXIT_OK


def cmd_witness(args) -> int:
    w = ex.instability_witness(args.size, args.eps, args.overlap)
    _emit(args, w.to_dict())
    return EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "transform": cmd_transform,
    "cheeger": cmd_cheeger,
    "bounds": cmd_bounds,
    "ambiguity": cmd_ambiguity,
    "sweep": cmd_sweep,
    "witness": cmd_witness,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file whose keys mirror the flags")
    common.add_argument("--bank", help="shannon:N[:nolow], overlapping:N:EPS, random:N:L, zero:N[:L] or a JSON file")
    common.add_argument("--signal", help="random, bump, filters:L1,L2, delta:X, zero, or a JSON/CSV file")
    common.add_argument("--field", choices=["real", "complex"])
    common.add_argument("--strategy", choices=["exhaustive", "product", "local", "product_sets", "local_search"])
    common.add_argument("--budget", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--out")

    parser = argparse.ArgumentParser(prog="cheegerlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check", parents=[common], help="Calderon and spectral-injectivity checks")
    p.add_argument("--require", choices=["calderon", "si", "both", "none"])
    sub.add_parser("transform", parents=[common], help="analyze a signal")
    p = sub.add_parser("cheeger", parents=[common], help="kernel or graph Cheeger constant")
    p.add_argument("--mode", choices=["kernel", "graph"])
    p.add_argument("--coefficients", help="coefficient-field JSON used instead of analyzing --signal")
    p = sub.add_parser("bounds", parents=[common], help="stability bounds and empirical estimate")
    p.add_argument("--bound", choices=["auto", "real", "temporal"])
    p = sub.add_parser("ambiguity", parents=[common], help="build a sign/phase ambiguity")
    p.add_argument("--parts", help="JSON list of label lists")
    p.add_argument("--signs", help="JSON list of signs (numbers or [re, im] pairs)")
    p.add_argument("--spec", help="ambiguity spec JSON file")
    p = sub.add_parser("sweep", parents=[common], help="separation sweep over shifts")
    p.add_argument("--shifts", help="comma-separated shifts")
    p.add_argument("--size", type=int)
    p.add_argument("--overlap", type=float)
    p.add_argument("--format", choices=["json", "csv"])
    p = sub.add_parser("witness", parents=[common], help="instability witness pair")
    p.add_argument("--size", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--overlap", type=float)
    return parser


def resolve(args) -> argparse.Namespace:
    """Fill unset flags from --config, then from the defaults; validate knobs."""
    config = {}
    if getattr(args, "config", None):
        try:
            config = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot parse config {args.config}: {err}") from err
        if not isinstance(config, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(config) - set(DEFAULTS) - {"command"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key, default in DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, config.get(key, default))
    if args.tol is not None and args.tol <= 0:
        raise ConfigError("tolerances must be positive")
    if args.budget is not None and args.budget < 1:
        raise ConfigError("budgets must be at least 1")
    if args.threads < 1:
        raise ConfigError("--threads must be at least 1")
    if args.strategy in ("product", "local"):
        args.strategy = kc.normalize_strategy(args.strategy)
    return args


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = resolve(args)
        return COMMANDS[args.command](args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except LabError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.exit_code
    except (ValueError, OSError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
