"""Command-line front end.

Every subcommand writes a CSV (stdout or --out) whose first line is a
versioned header comment. Exit codes: 0 ok, 1 tolerance failure, 2 parse
error, 3 class violation, 4 numeric failure.
"""

import argparse
import io
import json
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from . import densities as dens
from . import funcspace as fs
from .config import DEFAULT
from .errors import (ArgumentError, ClassError, DegenerateError, FivolError, NumericError,
                     UnsupportedDensityError, UnsupportedFunctionError)
from .intrinsic import REPRESENTATIONS, ClassicalBody, fiv, fiv_oracle_ut
from .measures import (conj_ma_integral, ma_integral, rel_err, theta_j_integral,
                       theta_star_j_integral)
from . import steiner as st

CSV_VERSION = "v1"
EXIT_OK, EXIT_TOL, EXIT_PARSE, EXIT_CLASS, EXIT_NUMERIC = 0, 1, 2, 3, 4


@dataclass
class JobSpec:
    command: str
    inputs: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    output: str = None
    svg: str = None
    tolerances: dict = field(default_factory=dict)


def fmt(x):
    if isinstance(x, str):
        return x
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.12g" % float(x)


class CsvOut:
    def __init__(self, command, columns):
        self.buf = io.StringIO()
        self.buf.write(f"# artifact-csv {CSV_VERSION} command={command}\n")
        self.buf.write(",".join(columns) + "\n")
        self.n = len(columns)

    def row(self, *vals):
        if len(vals) != self.n:
            raise ValueError("row length does not match header")
        self.buf.write(",".join(fmt(v) for v in vals) + "\n")

    def text(self):
        return self.buf.getvalue()


# ---------------------------------------------------------------------------
# SVG line chart
# ---------------------------------------------------------------------------

def svg_line_chart(series, title="", width=480, height=320, pad=48):
    """series: list of (label, xs, ys, dashed). Returns SVG text."""
    xs = np.concatenate([np.asarray(s[1], float) for s in series])
    ys = np.concatenate([np.asarray(s[2], float) for s in series])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def X(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def Y(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
           f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
           f'<text x="{width / 2:.1f}" y="{pad / 2:.1f}" text-anchor="middle" font-size="13">{title}</text>']
    for v, anchor in ((x0, "start"), (x1, "end")):
        out.append(f'<text x="{X(v):.1f}" y="{height - pad + 16:.1f}" text-anchor="{anchor}" '
                   f'font-size="11">{v:.3g}</text>')
    for v in (y0, y1):
        out.append(f'<text x="{pad - 4:.1f}" y="{Y(v) + 4:.1f}" text-anchor="end" font-size="11">{v:.3g}</text>')
    for i, (label, sx, sy, dashed) in enumerate(series):
        c = colors[i % len(colors)]
        pts = " ".join(f"{X(a):.2f},{Y(b):.2f}" for a, b in zip(sx, sy))
        dash = ' stroke-dasharray="5,4"' if dashed else ""
        out.append(f'<polyline points="{pts}" fill="none" stroke="{c}" stroke-width="1.5"{dash}/>')
        out.append(f'<text x="{width - pad:.1f}" y="{pad + 14 * (i + 1):.1f}" text-anchor="end" '
                   f'font-size="11" fill="{c}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def steiner_svg(rep, title):
    rs = np.linspace(min(rep.r_nodes), max(rep.r_nodes), 80)
    fit = np.polyval(rep.fitted_coefficients[::-1], rs)
    ref = np.polyval(rep.rhs_coefficients[::-1], rs)
    return svg_line_chart([("fitted lhs", rs, fit, False), ("rhs polynomial", rs, ref, True),
                           ("lhs samples", rep.r_nodes, rep.lhs_values, False)], title)


# ---------------------------------------------------------------------------
# input parsing
# ---------------------------------------------------------------------------

def _read_json(path):
    with open(path) as fh:
        return json.load(fh)


def load_density(path):
    try:
        return dens.Density.from_dict(_read_json(path))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise ArgumentError(f"cannot read density {path}: {e}") from e


def load_function(path):
    try:
        return fs.from_dict(_read_json(path))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as e:
        raise ArgumentError(f"cannot read function {path}: {e}") from e


def load_body(path):
    try:
        return ClassicalBody.from_dict(_read_json(path))
    except (OSError, json.JSONDecodeError) as e:
        raise ArgumentError(f"cannot read body {path}: {e}") from e


def _floats(text):
    if text is None:
        return None
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError as e:
        raise ArgumentError(f"bad number list {text!r}") from e


def _with_t(f, t):
    """Re-parameterise a one-parameter catalog function."""
    if isinstance(f, (fs.CatalogUt, fs.CatalogVt)):
        return replace(f, t=t)
    raise ArgumentError("--t needs a Ut or Vt function")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_fiv(a):
    zeta = load_density(a.density)
    f = load_function(a.function)
    ts = _floats(a.t)
    cases = [(None, f)] if ts is None else [(t, _with_t(f, t)) for t in ts]
    out = CsvOut("fiv", ["side", "n", "j", "t", "value", "representation", "oracle", "rel_error"])
    ok = True
    reps = [a.representation] if a.representation else [None]
    for t, g in cases:
        for rep in reps:
            val = fiv(g, a.j, zeta, a.n, a.side, rep)
            oracle = err = None
            if isinstance(g, (fs.CatalogUt, fs.CatalogVt)) and a.j >= 1:
                oracle = fiv_oracle_ut(g.t, a.j, a.n, zeta)
                err = rel_err(val, oracle)
                ok &= err <= a.tol
            out.row(a.side, a.n, a.j, t, val, rep or "default", oracle, err)
    return out, ok, None


def _steiner_rows(command, rep):
    out = CsvOut(command, ["kind", "index", "r", "lhs", "rhs", "fitted", "rel_error"])
    rv = rep.rhs_values()
    for i, (r, l, q) in enumerate(zip(rep.r_nodes, rep.lhs_values, rv)):
        out.row("node", i, r, l, q, None, rel_err(l, q))
    for k, (c, f, e) in enumerate(zip(rep.rhs_coefficients, rep.fitted_coefficients,
                                      rep.per_coefficient_rel_error)):
        out.row("coefficient", k, None, None, c, f, e)
    out.row("residual", 0, None, None, None, None, rep.residual)
    return out


def _steiner_ok(rep, a):
    return rep.max_rel_error <= a.coef_tol and rep.residual <= a.residual_tol


def cmd_steiner(a):
    zeta = load_density(a.density)
    u = load_function(a.function)
    rep = st.steiner_verify(u, zeta, a.n, _floats(a.r_nodes))
    return _steiner_rows("steiner-verify", rep), _steiner_ok(rep, a), steiner_svg(rep, "primal Steiner")


def cmd_dual_steiner(a):
    zeta = load_density(a.density)
    v = load_function(a.function)
    rep = st.dual_steiner_verify(v, zeta, a.n, _floats(a.r_nodes), a.variant)
    return _steiner_rows("dual-steiner-verify", rep), _steiner_ok(rep, a), steiner_svg(rep, "dual Steiner")


def cmd_transform(a):
    zeta = load_density(a.density)
    if a.op == "R":
        res = dens.transform_R(zeta, a.l, a.n, a.k)
    elif a.op == "R_inv":
        res = dens.transform_R_inv(zeta, a.l, a.n, a.k)
    elif a.op == "steiner":
        if a.n is None:
            raise ArgumentError("--op steiner needs --n")
        res = dens.steiner_densities(zeta, a.n)
    else:
        raise ArgumentError(f"unknown op {a.op}")
    if isinstance(res, list):
        text = json.dumps([r.to_dict() for r in res], sort_keys=True) + "\n"
    else:
        text = res.to_json() + "\n"
    return text, True, None


def cmd_retrieve(a):
    K = load_body(a.body)
    zeta = load_density(a.density)
    rep, rec, ref = st.classical_steiner_retrieve(K, zeta, _floats(a.r_nodes))
    out = CsvOut("retrieve-classical", ["j", "recovered", "reference", "rel_error"])
    ok = True
    for j, (x, y) in enumerate(zip(rec, ref)):
        e = rel_err(x, y)
        ok &= e <= a.tol
        out.row(j, x, y, e)
    return out, ok, steiner_svg(rep, "classical Steiner")


def cmd_measure(a):
    beta = load_density(a.density)
    f = load_function(a.function)
    m = a.measure
    if m == "ma":
        val = ma_integral(f, beta, a.n)
    elif m == "conj-ma":
        val = conj_ma_integral(f, beta, a.n)
    elif m == "theta":
        val = theta_j_integral(f, a.j, beta, a.n)
    elif m == "theta-star":
        val = theta_star_j_integral(f, a.j, beta, a.n)
    else:
        raise ArgumentError(f"unknown measure {m}")
    out = CsvOut("measure-integral", ["measure", "n", "j", "value"])
    out.row(m, a.n, a.j if m.startswith("theta") else None, val)
    return out, True, None


def cmd_phi(a):
    phi = st.PhiProfile.polynomial(_floats(a.phi))
    alpha = load_density(a.alpha)
    sol = st.general_phi_beta_solve(alpha, phi, a.j, a.n)
    S = sol.support
    ts = np.linspace(0.0, S, a.points + 2)[1:-1]
    out = CsvOut("phi-steiner", ["t", "alpha", "equation_lhs", "beta", "abs_error", "exact", "diverges_at_zero"])
    ok = True
    for t in ts:
        lhs = sol.integral_equation_lhs(t)
        e = abs(lhs - float(alpha(t)))
        ok &= e <= a.tol
        out.row(t, float(alpha(t)), lhs, float(sol(t)), e, sol.density is not None, sol.diverges_at_zero)
    return out, ok, None


COMMANDS = {
    "fiv": cmd_fiv,
    "steiner-verify": cmd_steiner,
    "dual-steiner-verify": cmd_dual_steiner,
    "transform": cmd_transform,
    "retrieve-classical": cmd_retrieve,
    "measure-integral": cmd_measure,
    "phi-steiner": cmd_phi,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ArgumentError(message)


def build_parser():
    s = DEFAULT.steiner
    p = _Parser(prog="fivol", description="Functional intrinsic volumes and Steiner formulas.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(q, out=True, svg=False):
        if out:
            q.add_argument("--out", help="output path (default stdout)")
        if svg:
            q.add_argument("--svg", help="also write an SVG chart")

    q = sub.add_parser("fiv", help="functional intrinsic volume")
    q.add_argument("--side", choices=["primal", "dual"], default="primal")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--j", type=int, required=True)
    q.add_argument("--density", required=True)
    q.add_argument("--function", required=True)
    q.add_argument("--t", help="sweep values for a Ut/Vt function")
    q.add_argument("--representation", choices=REPRESENTATIONS)
    q.add_argument("--tol", type=float, default=1e-8)
    common(q)

    for name, dual in (("steiner-verify", False), ("dual-steiner-verify", True)):
        q = sub.add_parser(name, help="functional Steiner formula check")
        q.add_argument("--n", type=int, required=True)
        q.add_argument("--density", required=True)
        q.add_argument("--function", required=True)
        q.add_argument("--r-nodes", help="comma separated radii")
        q.add_argument("--coef-tol", type=float, default=s.coefficient_tol)
        q.add_argument("--residual-tol", type=float, default=s.residual_tol)
        if dual:
            q.add_argument("--variant", choices=["support", "quadratic"], default="support")
        common(q, svg=True)

    q = sub.add_parser("transform", help="R-transform of a density (JSON out)")
    q.add_argument("--density", required=True)
    q.add_argument("--op", choices=["R", "R_inv", "steiner"], default="R")
    q.add_argument("--l", type=int, default=1)
    q.add_argument("--n", type=int)
    q.add_argument("--k", type=int)
    common(q)

    q = sub.add_parser("retrieve-classical", help="intrinsic volumes of a ball or box via Steiner")
    q.add_argument("--body", required=True)
    q.add_argument("--density", required=True)
    q.add_argument("--r-nodes")
    q.add_argument("--tol", type=float, default=1e-8)
    common(q, svg=True)

    q = sub.add_parser("measure-integral", help="integral of beta(|x|) against a measure")
    q.add_argument("--measure", choices=["ma", "conj-ma", "theta", "theta-star"], required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--j", type=int, default=0)
    q.add_argument("--density", required=True, help="test function beta")
    q.add_argument("--function", required=True)
    common(q)

    q = sub.add_parser("phi-steiner", help="beta solver for phi o h_B")
    q.add_argument("--phi", required=True, help="power coefficients of phi, e.g. '0,0,0.5'")
    q.add_argument("--alpha", required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--j", type=int, required=True)
    q.add_argument("--points", type=int, default=50)
    q.add_argument("--tol", type=float, default=1e-9)
    common(q)
    return p


def run(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        a = build_parser().parse_args(argv)
    except ArgumentError as e:
        print(f"error: {e}", file=stderr)
        return EXIT_PARSE
    except SystemExit as e:         # --help
        return EXIT_OK if e.code in (0, None) else EXIT_PARSE
    try:
        if getattr(a, "n", None) is not None and not 1 <= a.n <= DEFAULT.max_dim:
            raise ArgumentError(f"n must lie in 1..{DEFAULT.max_dim}")
        out, ok, svg = COMMANDS[a.command](a)
    except ClassError as e:
        print(f"class violation: {e}", file=stderr)
        return EXIT_CLASS
    except (ArgumentError, UnsupportedDensityError) as e:
        print(f"parse error: {e}", file=stderr)
        return EXIT_PARSE
    except (NumericError, UnsupportedFunctionError, DegenerateError, FivolError) as e:
        print(f"numeric failure: {e}", file=stderr)
        return EXIT_NUMERIC
    text = out if isinstance(out, str) else out.text()
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if svg is not None and getattr(a, "svg", None):
        with open(a.svg, "w") as fh:
            fh.write(svg)
    return EXIT_OK if ok else EXIT_TOL


def main():
    sys.exit(run())
