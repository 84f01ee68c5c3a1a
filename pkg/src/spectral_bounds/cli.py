"""Command-line front end: ``spectral-bounds {bounds,history,verify}``.

Data goes to ``--output`` (or standard output) as CSV with the header
``step,family,index,value,flag``; diagnostics go to standard error.

Exit codes: 0 success, 1 usage, 2 input error, 3 math or precondition
error, 4 verification failure.
"""

import argparse
import csv
import os
import sys

import numpy as np

from .errors import SpectralBoundsError
from .kahan import block_lanczos_step, goerisch_left, goerisch_w, inexact_solve
from .lanczos import (
    HistoryConfig,
    certified_kappa,
    convergence_history,
    ends_config,
    interior_config,
    lanczos,
)
from .lehmann import left_lehmann, right_lehmann
from .matrix_market import read_matrix_market
from .pencil import Pencil, schwarz_matrices, solve_definite_gep
from .ritz import harmonic_ritz
from .verify import run_suite

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_MATH, EXIT_VERIFY = 0, 1, 2, 3, 4
SEED_ENV = "SPECTRAL_BOUNDS_SEED"
HEADER = ("step", "family", "index", "value", "flag")

VARIANT_FAMILY = {
    "ritz": "ritz",
    "harmonic": "harmonic",
    "dual": "dual",
    "right": "lehmann_right",
    "left": "lehmann_left",
    "goerisch": "goerisch_left",
    "exact": "exact",
}
DEFAULT_VARIANTS = "ritz,harmonic,dual,right,left,goerisch"


class InputError(Exception):
    """Malformed command-line values or unreadable input files."""


class MathError(Exception):
    """A precondition failure, labeled with the operation that raised it."""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(x):
    return format(float(x), ".17g")


# ---------------------------------------------------------------- inputs

def parse_generator(spec):
    """``diag:a:b:c`` (a, a+b, ... up to c inclusive), ``diag:v1,v2,...`` or ``randspd:n:seed``."""
    kind, _, rest = spec.partition(":")
    try:
        if kind == "diag":
            if "," in rest or rest.count(":") == 0:
                vals = [float(v) for v in rest.split(",") if v.strip()]
            else:
                parts = rest.split(":")
                if len(parts) != 3:
                    raise InputError(f"diag range must be start:step:stop, got '{rest}'")
                a, b, c = (float(p) for p in parts)
                if b == 0 or (c - a) / b < 0:
                    raise InputError(f"empty range '{rest}'")
                count = int(np.floor((c - a) / b + 1e-9)) + 1
                vals = a + b * np.arange(count)
            if len(vals) == 0:
                raise InputError("diag generator needs at least one value")
            return np.diag(np.asarray(vals, dtype=float))
        if kind == "randspd":
            parts = rest.split(":")
            if len(parts) != 2:
                raise InputError(f"randspd needs n:seed, got '{rest}'")
            n, seed = int(parts[0]), int(parts[1])
            if n < 1:
                raise InputError("randspd size must be positive")
            rng = np.random.default_rng(seed)
            Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
            return (Q * rng.uniform(1.0, 20.0, n)) @ Q.T
    except ValueError as exc:
        raise InputError(f"bad generator '{spec}': {exc}") from None
    raise InputError(f"unknown generator '{spec}'")


def _load_matrix(path, gen, what):
    if (path is None) == (gen is None):
        raise InputError(f"give exactly one of --{what} and --{what}-gen"
                         if what != "matrix" else "give exactly one of --matrix and --gen")
    if path is not None:
        try:
            return read_matrix_market(path)
        except SpectralBoundsError as exc:
            raise InputError(str(exc)) from None
    return parse_generator(gen)


def build_pencil(args):
    K = _load_matrix(args.matrix, args.gen, "matrix")
    M = None
    if args.mass is not None or args.mass_gen is not None:
        M = _load_matrix(args.mass, args.mass_gen, "mass")
    return _math("pencil", Pencil, K, M)


def _start_vector(spec, n, rng):
    if spec == "ones":
        return np.ones(n)
    if spec == "random":
        return rng.standard_normal(n)
    if spec.startswith("e") and spec[1:].isdigit():
        j = int(spec[1:])
        if not 1 <= j <= n:
            raise InputError(f"unit vector {spec} out of range for n={n}")
        return np.eye(n)[:, j - 1]
    raise InputError(f"unknown start vector '{spec}' (use ones, random or e<j>)")


def build_basis(args, pencil, rng):
    n = pencil.n
    chosen = [s for s in (args.krylov, args.columns, args.random) if s is not None]
    if len(chosen) != 1:
        raise InputError("give exactly one of --krylov, --columns and --random")
    if args.krylov is not None:
        start, _, m = args.krylov.partition(":")
        try:
            m = int(m)
        except ValueError:
            raise InputError(f"--krylov expects START:m, got '{args.krylov}'") from None
        q1 = _start_vector(start, n, rng)
        fact = _math("lanczos", lanczos, pencil.solve_m(pencil.K), q1, m, pencil.M)
        if fact.ell < m:
            print(f"note: Krylov space became invariant after {fact.ell} steps",
                  file=sys.stderr)
        return fact.Q_ell
    if args.random is not None:
        if args.random < 1:
            raise InputError("--random needs a positive column count")
        return rng.standard_normal((n, args.random))
    spec = args.columns
    if os.path.exists(spec):
        try:
            P = np.loadtxt(spec, ndmin=2)
        except ValueError as exc:
            raise InputError(f"{spec}: {exc}") from None
        if P.shape[0] != n:
            raise InputError(f"{spec}: basis has {P.shape[0]} rows, pencil has n={n}")
        return P
    return np.column_stack([_start_vector(tok.strip(), n, rng) for tok in spec.split(",")])


def parse_rho(text, pencil):
    if text.startswith("gap:"):
        try:
            r = int(text[4:])
        except ValueError:
            raise InputError(f"bad gap index in '{text}'") from None
        lam = pencil.eigenvalues()
        if not 2 <= r <= lam.size:
            raise InputError(f"gap:r needs 2 <= r <= n = {lam.size}")
        return 0.5 * (lam[r - 2] + lam[r - 1])
    try:
        return float(text)
    except ValueError:
        raise InputError(f"--rho must be a number or gap:r, got '{text}'") from None


def _math(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except (SpectralBoundsError, np.linalg.LinAlgError) as exc:
        raise MathError(f"{name}: {exc}") from None


# ---------------------------------------------------------------- rows

def edge_rows(step, family, values, flag=""):
    vals = np.asarray(values, dtype=float)
    m = vals.size
    rows = []
    for i, v in enumerate(vals):
        k = i + 1
        label = k if k <= m - k + 1 else -(m - k + 1)
        rows.append((step, family, label, _fmt(v), flag))
    return rows


def shifted_rows(step, family, bounds):
    rows = [(step, family, label, _fmt(v), "wrapped" if w else "")
            for label, v, w in bounds.labeled()]
    rows += [(step, family, 0, "nan", "indeterminate")] * bounds.indeterminate
    return rows


def _about_shift_rows(step, family, values, rho, flag):
    vals = np.sort(np.asarray(values, dtype=float))
    below = vals[vals < rho][::-1]
    above = vals[vals > rho]
    rows = [(step, family, -k, _fmt(v), flag) for k, v in enumerate(below, 1)][::-1]
    rows += [(step, family, k, _fmt(v), flag) for k, v in enumerate(above, 1)]
    return rows


def _write(rows, output):
    fh = sys.stdout if output in (None, "-") else open(output, "w", newline="", encoding="utf-8")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        w.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()


# ---------------------------------------------------------------- commands

def _variants(text):
    names = [v.strip() for v in text.split(",") if v.strip()]
    bad = [v for v in names if v not in VARIANT_FAMILY]
    if bad or not names:
        raise InputError(f"unknown variant(s) {bad}; choose from {sorted(VARIANT_FAMILY)}")
    return names


def cmd_bounds(args, rng):
    variants = _variants(args.variants)
    pencil = build_pencil(args)
    P = build_basis(args, pencil, rng)
    rho = parse_rho(args.rho, pencil)
    m = P.shape[1]
    S = _math("schwarz_matrices", schwarz_matrices, pencil, P)
    rows = []
    for v in variants:
        fam = VARIANT_FAMILY[v]
        if v == "ritz":
            rows += edge_rows(m, fam, _math("ritz", solve_definite_gep, S.H1, S.H2)[0])
        elif v == "harmonic":
            res = _math("harmonic_ritz", harmonic_ritz, pencil, P)
            rows += edge_rows(m, fam, res.values, "" if res.guaranteed else "unguaranteed")
        elif v == "dual":
            rows += edge_rows(m, fam, _math("dual_harmonic_ritz", solve_definite_gep,
                                            S.H2, S.H3)[0])
        elif v == "right":
            rows += shifted_rows(m, fam, _math("right_lehmann", right_lehmann, S, rho))
        elif v == "left":
            rows += shifted_rows(m, fam, _math("left_lehmann", left_lehmann, S, rho))
        elif v == "goerisch":
            rows += shifted_rows(m, fam, _goerisch(pencil, P, rho, args))
        elif v == "exact":
            rows += edge_rows(0, fam, pencil.eigenvalues())
    _write(rows, args.output)
    return EXIT_OK


def _goerisch(pencil, P, rho, args):
    data = _math("block_lanczos_step", block_lanczos_step, pencil, P)
    kappa = args.kappa
    if kappa is None:
        kappa = _math("certified_kappa", certified_kappa, pencil.K, pencil.M)
    Z = inexact_solve(pencil.K, pencil.M @ data.Q2, args.cg_steps)
    W_hat = _math("goerisch_w", goerisch_w, pencil.K, data.Q2, Z, kappa, M=pencil.M)
    return _math("goerisch_left", goerisch_left, data.H, data.C, W_hat, rho)


def history_rows(hist):
    rows = edge_rows(0, "exact", hist.exact)
    rho = hist.config.rho
    for rec in hist.records:
        s = rec.step
        rows += edge_rows(s, "ritz", rec.ritz)
        rows += edge_rows(s, "harmonic", rec.harmonic)
        rows += edge_rows(s, "dual", rec.dual)
        rows += shifted_rows(s, "lehmann_right", rec.lehmann_right)
        rows += shifted_rows(s, "lehmann_left", rec.lehmann_left)
        rows += shifted_rows(s, "goerisch_left", rec.goerisch_left)
        rows += _about_shift_rows(s, "shift_invert", rec.shift_invert, rho, "estimate")
    return rows


def cmd_history(args, rng):
    if args.preset is not None:
        if args.matrix or args.gen:
            raise InputError("--preset cannot be combined with --matrix/--gen")
        config = ends_config() if args.preset == "ends" else interior_config()
        if args.rho is not None:
            config = HistoryConfig(config.K, config.q1, parse_rho(args.rho, Pencil(config.K)),
                                   targets=config.targets, name=config.name)
    else:
        pencil = build_pencil(args)
        if args.rho is None:
            raise InputError("--rho is required without --preset")
        q1 = _start_vector(args.start, pencil.n, rng)
        config = HistoryConfig(pencil.K, q1, parse_rho(args.rho, pencil),
                               M=None if pencil.identity_mass else pencil.M,
                               kappa=args.kappa)
    hist = _math("convergence_history", convergence_history, config, max_ell=args.max_ell)
    _write(history_rows(hist), args.output)
    return EXIT_OK


def cmd_verify(args, rng):
    if args.count < 1 or not 3 <= args.n_min <= args.n_max:
        raise InputError("need count >= 1 and 3 <= n-min <= n-max")
    report = run_suite(seed=args.seed, count=args.count, n_min=args.n_min, n_max=args.n_max)
    text = report.format()
    if args.output in (None, "-"):
        print(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return EXIT_OK if report.ok else EXIT_VERIFY


# ---------------------------------------------------------------- parser

def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{SEED_ENV} must be an integer, got '{raw}'") from None


def _add_matrix_args(p):
    p.add_argument("--matrix", help="Matrix Market file for K")
    p.add_argument("--gen", help="generator for K: diag:a:b:c, diag:v1,v2,..., randspd:n:seed")
    p.add_argument("--mass", help="Matrix Market file for M (default: identity)")
    p.add_argument("--mass-gen", help="generator for M")
    p.add_argument("--kappa", type=float, help="lower bound on the smallest eigenvalue")
    p.add_argument("--output", "-o", help="output file (default: standard output)")
    p.add_argument("--seed", type=int, help=f"random seed (default: ${SEED_ENV} or 0)")


def build_parser():
    parser = _Parser(prog="spectral-bounds",
                     description="Eigenvalue bounds for symmetric definite pencils.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    b = sub.add_parser("bounds", help="bounds from one trial subspace")
    _add_matrix_args(b)
    b.add_argument("--krylov", help="Krylov basis START:m with START in ones, random, e<j>")
    b.add_argument("--columns", help="comma list of unit vectors (e1,e3) or a text file")
    b.add_argument("--random", type=int, help="random basis with this many columns")
    b.add_argument("--rho", required=True, help="shift value or gap:r")
    b.add_argument("--variants", default=DEFAULT_VARIANTS,
                   help=f"comma list from {','.join(VARIANT_FAMILY)}")
    b.add_argument("--cg-steps", type=int, default=5,
                   help="CG iterations for the Goerisch inner solves")
    b.set_defaults(func=cmd_bounds)

    h = sub.add_parser("history", help="per-step Krylov convergence history")
    _add_matrix_args(h)
    h.add_argument("--preset", choices=("ends", "interior"), help="diag(1:2:100) experiments")
    h.add_argument("--start", default="ones", help="start vector: ones, random or e<j>")
    h.add_argument("--rho", help="shift value or gap:r")
    h.add_argument("--max-ell", type=int, default=25, help="number of Lanczos steps")
    h.set_defaults(func=cmd_history)

    v = sub.add_parser("verify", help="randomized property suite")
    v.add_argument("--seed", type=int, help=f"random seed (default: ${SEED_ENV} or 0)")
    v.add_argument("--count", type=int, default=200, help="number of random instances")
    v.add_argument("--n-min", type=int, default=4, help="smallest dimension (at least 3)")
    v.add_argument("--n-max", type=int, default=12, help="largest dimension")
    v.add_argument("--output", "-o", help="report file (default: standard output)")
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if args.seed is None:
            args.seed = _default_seed()
        rng = np.random.default_rng(args.seed)
        return args.func(args, rng)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MathError as exc:
        print(f"error in {exc}", file=sys.stderr)
        return EXIT_MATH
    except SpectralBoundsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MATH


if __name__ == "__main__":
    sys.exit(main())
