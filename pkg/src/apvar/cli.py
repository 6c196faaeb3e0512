"""Command-line front end: verification suites, experiments, tables.

Every invocation writes a run manifest (command echo, versions, wall
time, output paths) into the output directory; identical flags produce
byte-identical CSV/JSON outputs.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .arith import (check_lemma1_matrix, load_sequence, ramanujan_row,
                    sieve_all)
from .dirichlet import (check_Fq1_bound, euler_F_q, residue_dk_correlation,
                        zeta_near_one)
from .pipeline import ExperimentConfig, run_theorem1, run_theorem2
from .variance import check_identity_prop1, variance_mod_q
from .windows import build_weights, build_window, check_lemma5

MAX_N = 2 * 10**7


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _write_manifest(out_dir: Path, command: str, config: dict, outputs,
                    wall_time: float):
    import numpy
    import scipy
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "config": {k: _fmt(v) if isinstance(v, float) else v
                   for k, v in sorted(config.items())
                   if not callable(v)},
        "versions": {"apvar": __version__, "numpy": numpy.__version__,
                     "scipy": scipy.__version__,
                     "python": sys.version.split()[0]},
        "wall_time_s": round(wall_time, 3),
        "outputs": [str(p) for p in outputs],
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


# ---------------------------------------------------------------------------
# verify


def _verify_identities(fault: bool) -> list:
    failures = []
    for q in (12, 30, 45):
        if not check_lemma1_matrix(q, 60, 60, fault=fault):
            failures.append(f"orthogonality identity failed at q={q}")
    n = 300
    table = sieve_all(n, 3)
    for name in ("d2", "d3", "lambda"):
        seq = load_sequence(name, n, table)
        for q in (12, 36, 49):
            chk = check_identity_prop1(seq, q)
            if not chk.ok:
                failures.append(
                    f"divisor identity failed: seq={name} q={q} "
                    f"residual={chk.residual} bad={chk.bad_divisors}")
    window = build_window(0.05)
    weights = build_weights("prime_sieve", 40)
    lhs, rhs, resid = check_lemma5(load_sequence("lambda", n, table),
                                   weights, window)
    if resid > 1e-9:
        failures.append(f"rearrangement identity residual {resid}")
    return failures


def _verify_euler() -> list:
    failures = []
    # Partial Dirichlet sums vs zeta^k F_q at s = 2.
    x = 200000
    tab = sieve_all(x, 3)
    ns = np.arange(x + 1, dtype=np.float64)
    ns[0] = 1.0
    for k in (2, 3):
        dk = tab.dk[k].astype(np.float64)
        for q in (1, 4, 6):
            direct = float(np.sum(dk * ramanujan_row_padded(q, x) / ns**2))
            pred = (zeta_near_one(2.0) ** k * euler_F_q(q, k, 2.0)).real
            if abs(direct - pred) > 5e-3 * abs(pred):
                failures.append(
                    f"Euler product mismatch k={k} q={q}: {direct} vs {pred}")
    for q in (2, 6, 15, 30, 210):
        for k in (2, 3, 4):
            if not check_Fq1_bound(q, k):
                failures.append(f"F_q(1) lower bound failed q={q} k={k}")
    return failures


def ramanujan_row_padded(q: int, n_max: int) -> np.ndarray:
    row = np.zeros(n_max + 1)
    row[1:] = ramanujan_row(q, n_max)
    return row


def _verify_windows() -> list:
    failures = []
    window = build_window(0.05)
    if not 0.94 < window.phi_int < 1.0:
        failures.append(f"plateau mass {window.phi_int} out of range")
    for xi in (0.0, 0.37, 3.2, 17.9, 120.0):
        table_val = window.phi_hat(xi)
        quad_val = window.phi_hat_quad(xi)
        if abs(table_val - quad_val) > 1e-8:
            failures.append(f"transform table off at xi={xi}: "
                            f"{table_val} vs {quad_val}")
    if any(c <= 0 for c in window.decay_constants.values()):
        failures.append("nonpositive decay constant")
    return failures


def cmd_verify(args) -> int:
    suites = {
        "identities": lambda: _verify_identities(args.inject_fault),
        "euler": _verify_euler,
        "windows": _verify_windows,
    }
    names = list(suites) if args.suite == "all" else [args.suite]
    t0 = time.time()
    failures = []
    for name in names:
        fails = suites[name]()
        status = "PASS" if not fails else "FAIL"
        print(f"verify {name}: {status}")
        for f in fails:
            print(f"  {f}")
        failures.extend(fails)
    out_dir = Path(args.out_dir)
    _write_manifest(out_dir, f"verify {args.suite}",
                    {"suite": args.suite, "inject_fault": args.inject_fault},
                    [], time.time() - t0)
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# experiment


def cmd_experiment(args) -> int:
    t0 = time.time()
    n = int(float(args.N))
    if n > MAX_N:
        print(f"error: N={n} above cap {MAX_N}", file=sys.stderr)
        return 2
    try:
        config = ExperimentConfig(
            experiment=args.kind, n=n, q_exp=args.Q_exp, k=args.k,
            delta=args.delta, epsilon=args.epsilon, k_exp=args.K_exp,
            r_override=args.R, t_grid=args.T, threads=args.threads,
            ending=args.ending, seed=args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    runner = run_theorem1 if args.kind == "theorem1" else run_theorem2
    try:
        report, summary = runner(config)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []

    report_path = out_dir / "bound_report.json"
    report_path.write_text(report.to_json() + "\n")
    outputs.append(report_path)

    csv_path = out_dir / "summary.csv"
    csv_path.write_text(report.csv_header() + "\n" + report.csv_row() + "\n")
    outputs.append(csv_path)

    plot_path = out_dir / "plot_data.csv"
    with open(plot_path, "w", newline="\n") as fh:
        if args.kind == "theorem2" and args.ending == "first":
            from .dirichlet import polynomial_69
            fh.write("alpha,polynomial\n")
            log_n = math.log(n)
            lo = math.log(max(config.n**config.epsilon, 2.0)) / log_n
            for alpha in np.linspace(max(lo, 0.05), 1.0, 200):
                val = polynomial_69(config.k, log_n, alpha * log_n,
                                    math.log(report.params["K"]
                                             * report.params["Q0"]))
                fh.write(f"{alpha:.12g},{val:.12g}\n")
        else:
            fh.write("q,V\n")
            seq_name = "lambda" if args.kind == "theorem1" else f"d{config.k}"
            seq = load_sequence(seq_name, min(n, 10**5))
            for q in range(1, min(int(report.params["Q"]), 400) + 1):
                v = variance_mod_q(seq, q, exact=False).v
                fh.write(f"{q},{float(v):.12g}\n")
    outputs.append(plot_path)

    wall = time.time() - t0
    outputs.append(_write_manifest(
        out_dir, f"experiment {args.kind}", vars(args) | {"n": n},
        outputs, wall))
    for key, val in summary.items():
        print(f"{key}: {_fmt(val)}")
    return 0


# ---------------------------------------------------------------------------
# table


def cmd_table(args) -> int:
    t0 = time.time()
    rows = []
    if args.what == "ramanujan":
        if args.q_max > 10**4 or args.n_max > 10**5:
            print("error: range too large", file=sys.stderr)
            return 2
        header = "q,n,c_q_n"
        for q in range(1, args.q_max + 1):
            row = ramanujan_row(q, args.n_max)
            rows.extend(f"{q},{n},{row[n - 1]}"
                        for n in range(1, args.n_max + 1))
    elif args.what == "variance":
        n = int(float(args.N))
        if n > MAX_N:
            print(f"error: N={n} above cap {MAX_N}", file=sys.stderr)
            return 2
        seq = load_sequence(args.seq, n)
        header = "q,V,method"
        for q in range(1, args.q_max + 1):
            rep = variance_mod_q(seq, q)
            rows.append(f"{q},{_fmt(rep.v)},{rep.method}")
    elif args.what == "weights":
        kind = "prime_sieve" if args.kind == "prime" else "divisor_k"
        weights = build_weights(kind, int(args.R), k=args.k)
        header = "r,b_r"
        rows.extend(f"{r},{_fmt(float(b))}" for r, b in weights.to_csv_rows())
    elif args.what == "residues":
        n = int(float(args.N))
        header = "q,k,N,value,error"
        for q in range(1, args.q_max + 1):
            pred = residue_dk_correlation(q, args.k, n)
            rows.append(f"{q},{args.k},{n},{pred.value:.12g},{pred.error:.3g}")
    else:  # pragma: no cover - argparse restricts choices
        return 2

    if args.format == "json":
        keys = header.split(",")
        payload = [dict(zip(keys, r.split(","))) for r in rows]
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        text = header + "\n" + "\n".join(rows) + "\n"
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.out:
        path = out_dir / args.out
        path.write_text(text, newline="\n")
        outputs = [path]
    else:
        sys.stdout.write(text)
        outputs = []
    _write_manifest(out_dir, f"table {args.what}",
                    {k: v for k, v in vars(args).items() if k != "func"},
                    outputs, time.time() - t0)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="apvar",
        description="Variance of arithmetic sequences in progressions: "
                    "identities, spectra, and lower-bound experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--N", default="1e5")
        p.add_argument("--Q-exp", dest="Q_exp", type=float, default=0.75)
        p.add_argument("--k", type=int, default=2)
        p.add_argument("--delta", type=float, default=0.1)
        p.add_argument("--epsilon", type=float, default=0.05)
        p.add_argument("--K-exp", dest="K_exp", type=float, default=None)
        p.add_argument("--R", type=float, default=None)
        p.add_argument("--T", type=int, default=None)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out-dir", default="apvar_runs")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--seed", type=int, default=0)

    p_verify = sub.add_parser("verify", help="run property suites")
    p_verify.add_argument("suite",
                          choices=("identities", "euler", "windows", "all"))
    p_verify.add_argument("--inject-fault", action="store_true",
                          help="test hook: perturb one Ramanujan value")
    p_verify.add_argument("--out-dir", default="apvar_runs")
    p_verify.set_defaults(func=cmd_verify)

    p_exp = sub.add_parser("experiment", help="full lower-bound chains")
    p_exp.add_argument("kind", choices=("theorem1", "theorem2"))
    p_exp.add_argument("--ending", choices=("first", "second"),
                       default="second")
    common(p_exp)
    p_exp.set_defaults(func=cmd_experiment)

    p_tab = sub.add_parser("table", help="deterministic CSV tables")
    p_tab.add_argument("what",
                       choices=("ramanujan", "variance", "weights", "residues"))
    p_tab.add_argument("--q-max", dest="q_max", type=int, default=12)
    p_tab.add_argument("--n-max", dest="n_max", type=int, default=12)
    p_tab.add_argument("--seq", default="d2")
    p_tab.add_argument("--kind", choices=("prime", "divisor"), default="prime")
    p_tab.add_argument("--out", default=None)
    common(p_tab)
    p_tab.set_defaults(func=cmd_table)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    q_exp = getattr(args, "Q_exp", None)
    if q_exp is not None and not 0 < q_exp <= 1.0:
        print(f"error: --Q-exp must lie in (0, 1], got {q_exp}",
              file=sys.stderr)
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
