"""Command-line front end.

Exit codes: 0 when every check passes, 1 on a verification mismatch, 2 on an
invalid configuration.
"""

import argparse
import json
import math
import re
import sys

import numpy as np

from .analyzer import NOMINAL_ANCILLA, BellStateAnalyzer, load_reference_tables, prepare_input, signal_labels
from .elements import apply, mode_phase
from .hilbert import BellLabel
from .measurement import RNG_ALGORITHM, deviation_in_sigmas, sample, sigma
from .protocols import run_dense_coding

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG = 0, 1, 2
ANALYZERS = {"pol": "polarization", "mom": "momentum"}
ANCILLAS = ("psi-plus", "psi-minus", "Psi-plus")
NORMALISATION_NOTE = (
    "correct-label probability |1+e^{i a}|^2/4 = cos^2(a/2), confirmed against the amplitude "
    "expansion; the variant |1+e^{i a}|^2/2 equals 2 at a=0 and is not a probability"
)
SUPPORT_TOL = 1e-12
ROW_PROB_TOL = 1e-10
SIGMA_LIMIT = 5.0

_ANGLE = re.compile(
    r"^(?P<sign>[+-]?)(?P<coef>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)?"
    r"(?:\*?(?P<pi>pi))?(?:/(?P<div>\d+(?:\.\d*)?))?$"
)


class ConfigError(ValueError):
    pass


def parse_angle(text):
    """Radians from ``0.5``, ``pi``, ``-pi/2``, ``2pi/3`` or ``2*pi/3``."""
    m = _ANGLE.match(text.strip())
    if not m or not (m.group("coef") or m.group("pi")):
        raise ConfigError(f"cannot parse angle {text!r}")
    value = float(m.group("coef")) if m.group("coef") else 1.0
    if m.group("pi"):
        value *= math.pi
    if m.group("div"):
        div = float(m.group("div"))
        if div == 0:
            raise ConfigError(f"division by zero in angle {text!r}")
        value /= div
    return -value if m.group("sign") == "-" else value


def _check_alpha(alpha):
    if not (math.isfinite(alpha) and -math.pi < alpha <= math.pi):
        raise ConfigError(f"alpha {alpha!r} outside (-pi, pi]")
    return alpha


def parse_grid(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"--alpha-grid expects start:stop:n, got {text!r}")
    start, stop = parse_angle(parts[0]), parse_angle(parts[1])
    try:
        n = int(parts[2])
    except ValueError:
        raise ConfigError(f"bad point count {parts[2]!r}") from None
    if n < 1:
        raise ConfigError("sweep grid must be nonempty")
    grid = [start] if n == 1 else np.linspace(start, stop, n).tolist()
    if n > 1:
        # keep the exact endpoint rather than a rounded linspace value
        grid[-1] = stop
    return [_check_alpha(a) for a in grid]


def _resolve(args):
    dof = ANALYZERS[args.analyzer]
    nominal = NOMINAL_ANCILLA[dof]
    ancilla = nominal if args.ancilla is None else BellLabel.parse(args.ancilla)
    if ancilla.dof == dof:
        raise ConfigError(f"ancilla {ancilla} must be in the other degree of freedom than the {dof} analyzer")
    if dof == "momentum" and ancilla != nominal:
        raise ConfigError("the momentum analyzer supports only the Psi-plus ancilla")
    label = None
    if getattr(args, "input", None) is not None:
        label = BellLabel.parse(args.input)
        if label.dof != dof:
            raise ConfigError(f"input {label} is not a {dof} Bell label")
    return dof, ancilla, label


def expected_label(dof, label, ancilla):
    """Label the analyzer reports for ``label`` given the ancilla actually used.

    A ``psi-`` mode ancilla flips the relative sign read by the polarization
    analyzer (Psi+ <-> Psi-, Phi+ <-> Phi-).
    """
    if ancilla == NOMINAL_ANCILLA[dof]:
        return label
    if dof == "polarization" and ancilla == BellLabel.psi_minus:
        return label.sign_flipped
    raise ConfigError(f"no known relabeling for ancilla {ancilla}")


def _config(args):
    cfg = {k: v for k, v in vars(args).items() if k not in ("func",)}
    cfg["rng"] = RNG_ALGORITHM
    return cfg


def _emit(args, text_body, structured):
    cfg = _config(args)
    if args.format == "structured":
        out = json.dumps({"config": cfg, **structured}, indent=2) + "\n"
    else:
        header = "".join(f"# {k}={v}\n" for k, v in cfg.items())
        out = header + text_body
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def cmd_verify_bsa(args):
    dof, ancilla, _ = _resolve(args)
    analyzer = BellStateAnalyzer(dof).fit()
    reference = load_reference_tables()[dof]["rows"]
    rows, failures = [], []
    for label in signal_labels(dof):
        dist = analyzer.outcome_distribution(prepare_input(dof, label, ancilla))
        support = [s for s, p in dist.items() if p > SUPPORT_TOL]
        expect = expected_label(dof, label, ancilla)
        want = reference[expect]
        ok = set(support) == set(want) and all(abs(dist[s] - 0.25) <= ROW_PROB_TOL for s in want)
        row = {
            "input": str(label),
            "expected_row": str(expect),
            "signatures": [str(s) for s in support],
            "probabilities": [dist[s] for s in support],
            "reference": [str(s) for s in want],
            "match": ok,
        }
        rows.append(row)
        if not ok:
            failures.append(row)
    lines = [f"{'input':<6} {'row':<6} {'signatures':<32} match"]
    for r in rows:
        lines.append(f"{r['input']:<6} {r['expected_row']:<6} {' '.join(r['signatures']):<32} {'yes' if r['match'] else 'NO'}")
    _emit(args, "\n".join(lines) + "\n", {"rows": rows, "match": not failures})
    for r in failures:
        print(
            f"mismatch: input {r['input']} -> {r['signatures']}, reference row {r['expected_row']} {r['reference']}",
            file=sys.stderr,
        )
    return EXIT_MISMATCH if failures else EXIT_OK


def _phase_state(dof, label, ancilla, alpha):
    return apply(mode_phase(1, "b", alpha), prepare_input(dof, label, ancilla))


def cmd_phase_sweep(args):
    dof, ancilla, label = _resolve(args)
    label = label or signal_labels(dof)[0]
    grid = parse_grid(args.alpha_grid) if args.alpha_grid else [_check_alpha(parse_angle(args.alpha or "0"))]
    analyzer = BellStateAnalyzer(dof).fit()
    correct = expected_label(dof, label, ancilla)
    rows, ok = [], True
    for k, alpha in enumerate(grid):
        psi = _phase_state(dof, label, ancilla, alpha)
        law = analyzer.classify(psi)
        exact = law[correct]
        closed = math.cos(alpha / 2) ** 2
        rep = sample(analyzer, psi, args.shots, args.seed + k)
        freq = rep.empirical[correct]
        z = deviation_in_sigmas({0: freq}, {0: exact}, args.shots)
        decoded = max(law, key=law.get)
        ok &= abs(exact - closed) <= 1e-12 and z < SIGMA_LIMIT
        rows.append({
            "alpha": alpha,
            "exact": exact,
            "cos2_half_alpha": closed,
            "sampled": freq,
            "sigma": sigma(exact, args.shots),
            "deviation_sigmas": z,
            "decoded": str(decoded),
        })
    lines = [f"# note: {NORMALISATION_NOTE}", f"# correct label: {correct}"]
    lines.append(f"{'alpha':>20} {'exact':>20} {'cos2(a/2)':>20} {'sampled':>10} {'z':>6} decoded")
    for r in rows:
        lines.append(
            f"{r['alpha']:>20.16f} {r['exact']:>20.16f} {r['cos2_half_alpha']:>20.16f} "
            f"{r['sampled']:>10.6f} {r['deviation_sigmas']:>6.2f} {r['decoded']}"
        )
    _emit(args, "\n".join(lines) + "\n", {"note": NORMALISATION_NOTE, "correct_label": str(correct), "rows": rows})
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_dense_code(args):
    alpha = _check_alpha(parse_angle(args.alpha or "0"))
    report = run_dense_coding(alpha, args.shots, args.seed)
    ok = all(
        deviation_in_sigmas(r.frequencies, r.exact, r.shots) < SIGMA_LIMIT for r in report.runs
    )
    _emit(args, report.to_text(), report.to_dict())
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_sample(args):
    dof, ancilla, label = _resolve(args)
    label = label or signal_labels(dof)[0]
    alpha = _check_alpha(parse_angle(args.alpha or "0"))
    analyzer = BellStateAnalyzer(dof).fit()
    rep = sample(analyzer, _phase_state(dof, label, ancilla, alpha), args.shots, args.seed)
    _emit(args, rep.to_text(), rep.to_dict())
    return EXIT_OK


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be >= 0")
    return v


def build_parser():
    parser = argparse.ArgumentParser(prog="hyperbell", description="Hyperentangled Bell-state analysis simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, analyzer=True, inputs=True):
        if analyzer:
            p.add_argument("--analyzer", choices=sorted(ANALYZERS), default="pol")
            p.add_argument("--ancilla", choices=ANCILLAS, default=None)
        if inputs:
            p.add_argument("--input", default=None, help="Bell label to prepare, e.g. Psi+ or phi-")
        p.add_argument("--shots", type=_positive_int, default=10_000)
        p.add_argument("--seed", type=_seed, default=0)
        p.add_argument("--format", choices=("text", "structured"), default="text")
        p.add_argument("--out", default=None)

    p = sub.add_parser("verify-bsa", help="reproduce the detector-signature table")
    common(p, inputs=False)
    p.set_defaults(func=cmd_verify_bsa)

    p = sub.add_parser("phase-sweep", help="correct-label probability versus mode phase error")
    common(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--alpha", default=None)
    g.add_argument("--alpha-grid", default=None, help="start:stop:n, inclusive")
    p.set_defaults(func=cmd_phase_sweep)

    p = sub.add_parser("dense-code", help="dense-coding round trip for all four messages")
    common(p, analyzer=False, inputs=False)
    p.add_argument("--alpha", default=None)
    p.set_defaults(func=cmd_dense_code)

    p = sub.add_parser("sample", help="sample coincidence events for one input")
    common(p)
    p.add_argument("--alpha", default=None)
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
