"""Command-line front end: parameter sweeps, CSV/SVG emission, reproduce run.

Outputs are deterministic: fixed quadrature rules, sweep results ordered by
parameter index regardless of worker completion order, and 17-significant-
digit formatting, so identical configs yield byte-identical files.

Exit codes: 0 success, 1 threshold failure in reproduce-paper, 2 usage
error, 3 numeric or resource error.
"""

from __future__ import annotations

import argparse
import difflib
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, bell, compress, forms, momentum, testfn
from .quadrature import QuadratureSpec
from .specfun import bessel_k0, bessel_k1, cosh_kernel, smooth_step

TSIRELSON = bell.TSIRELSON_BOUND
DEFAULT_EPS_LIST = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)
DEFAULT_JK_LIST = (2, 4, 6, 8)

VALID_CONFIG_KEYS = {
    "eps-list", "eta-list", "depth-list", "span-list", "mass", "c",
    "panels", "nodes", "out-dir", "threads", "grid", "family", "fn",
    "eps", "route", "kernel", "what", "delta", "dump-matrix",
}


class UsageError(Exception):
    pass


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def parse_config(path):
    """Read a line-based `key = value` file; '#' starts a comment."""
    cfg = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in VALID_CONFIG_KEYS:
            hint = difflib.get_close_matches(key, sorted(VALID_CONFIG_KEYS), n=1)
            suffix = f"; did you mean {hint[0]!r}?" if hint else ""
            raise UsageError(
                f"{path}:{lineno}: unknown key {key!r}{suffix} "
                f"(valid keys: {', '.join(sorted(VALID_CONFIG_KEYS))})")
        cfg[key] = value
    return cfg


def _effective(args, cfg, key, default, cast=str):
    flag = getattr(args, key.replace("-", "_"), None)
    if flag is not None:
        return flag
    if key in cfg:
        try:
            return cast(cfg[key])
        except ValueError as exc:
            raise UsageError(f"config key {key!r}: {exc}") from exc
    return default


def _float_list(text):
    try:
        return [float(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"bad numeric list {text!r}: {exc}") from exc


def _int_list(text):
    try:
        return [int(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"bad integer list {text!r}: {exc}") from exc


def map_ordered(fn, items):
    """Apply fn over items with a bounded thread pool; results keep item order."""
    workers = os.environ.get("BELL_HALFLINE_THREADS", "").strip()
    n = int(workers) if workers else min(4, os.cpu_count() or 1)
    items = list(items)
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def write_csv(path, header, rows, config_echo):
    lines = [f"# bell-halfline {__version__}"]
    for key in sorted(config_echo):
        lines.append(f"# {key} = {config_echo[key]}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_svg(path, xs, ys, xlabel, ylabel, title, logx=False, hline=None):
    """Minimal polyline plot; no plotting dependency."""
    W, H, ml, mr, mt, mb = 640, 440, 70, 20, 40, 50
    xs = [math.log10(x) for x in xs] if logx else list(xs)
    ys = list(ys)
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if hline is not None:
        y0, y1 = min(y0, hline), max(y1, hline)
    if x1 == x0:
        x1 = x0 + 1.0
    pad = 0.05 * (y1 - y0) or 0.5
    y0, y1 = y0 - pad, y1 + pad

    def px(x):
        return ml + (x - x0) / (x1 - x0) * (W - ml - mr)

    def py(y):
        return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W/2:.0f}" y="24" text-anchor="middle" font-size="15">{title}</text>',
        f'<line x1="{ml}" y1="{H-mb}" x2="{W-mr}" y2="{H-mb}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{H-mb}" stroke="black"/>',
    ]
    for i in range(5):
        xt = x0 + i * (x1 - x0) / 4
        yt = y0 + i * (y1 - y0) / 4
        label = f"1e{xt:.1f}" if logx else f"{xt:.3g}"
        parts.append(f'<line x1="{px(xt):.1f}" y1="{H-mb}" x2="{px(xt):.1f}" '
                     f'y2="{H-mb+5}" stroke="black"/>')
        parts.append(f'<text x="{px(xt):.1f}" y="{H-mb+20}" text-anchor="middle" '
                     f'font-size="11">{label}</text>')
        parts.append(f'<line x1="{ml-5}" y1="{py(yt):.1f}" x2="{ml}" '
                     f'y2="{py(yt):.1f}" stroke="black"/>')
        parts.append(f'<text x="{ml-8}" y="{py(yt)+4:.1f}" text-anchor="end" '
                     f'font-size="11">{yt:.4g}</text>')
    if hline is not None:
        parts.append(f'<line x1="{ml}" y1="{py(hline):.1f}" x2="{W-mr}" '
                     f'y2="{py(hline):.1f}" stroke="gray" stroke-dasharray="6,4"/>')
    pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="crimson" stroke-width="2"/>')
    for x, y in zip(xs, ys):
        parts.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" fill="crimson"/>')
    parts.append(f'<text x="{(ml+W-mr)/2:.0f}" y="{H-12}" text-anchor="middle" '
                 f'font-size="13">{xlabel}</text>')
    parts.append(f'<text x="18" y="{(mt+H-mb)/2:.0f}" text-anchor="middle" '
                 f'font-size="13" transform="rotate(-90 18 {(mt+H-mb)/2:.0f})">{ylabel}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")


def _spec_from(args, cfg):
    panels = _effective(args, cfg, "panels", 32, int)
    nodes = _effective(args, cfg, "nodes", 16, int)
    return QuadratureSpec(panels=int(panels), nodes_per_panel=int(nodes))


def _parse_grid(text):
    toks = str(text).split(",")
    if len(toks) != 4 or toks[3] not in ("log", "lin"):
        raise UsageError(f"grid must be 'start,stop,n,log|lin', got {text!r}")
    start, stop, n = float(toks[0]), float(toks[1]), int(toks[2])
    if n < 2 or not stop > start:
        raise UsageError(f"bad grid {text!r}")
    if toks[3] == "log":
        if start <= 0:
            raise UsageError("log grid needs start > 0")
        return np.geomspace(start, stop, n)
    return np.linspace(start, stop, n)


def _massive_profile(eps, mass, nspec):
    prof = testfn.normalize(testfn.damp_exponential(testfn.build_phi_tilde(eps)), nspec)
    return testfn.dilate(prof, mass)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_specfun_table(args, cfg):
    fn_name = _effective(args, cfg, "fn", None)
    if fn_name not in ("k0", "k1", "h", "tau"):
        raise UsageError("--fn must be one of k0, k1, h, tau")
    grid = _parse_grid(_effective(args, cfg, "grid", "0.01,30,100,log"))
    eps = float(_effective(args, cfg, "eps", 0.1, float))
    table = {
        "k0": bessel_k0, "k1": bessel_k1, "h": cosh_kernel,
        "tau": lambda u: smooth_step(u, eps),
    }
    vals = table[fn_name](grid)
    rows = [(float(u), float(v)) for u, v in zip(grid, np.atleast_1d(vals))]
    out = _effective(args, cfg, "out-dir", ".")
    path = Path(out) / f"specfun_{fn_name}.csv"
    write_csv(path, ["u", "value"], rows, {"fn": fn_name, "eps": _fmt(eps)})
    print(path)
    return 0


def cmd_testfn_sample(args, cfg):
    family = _effective(args, cfg, "family", "phi")
    if family not in ("phi", "phi-damped"):
        raise UsageError("--family must be phi or phi-damped")
    eps = float(_effective(args, cfg, "eps", 0.1, float))
    mass = float(_effective(args, cfg, "mass", 0.0, float))
    grid = _parse_grid(_effective(args, cfg, "grid",
                                  f"{eps/2:.17g},{2/eps:.17g},200,log"))
    nspec = QuadratureSpec(panels=48)
    phi = testfn.build_phi_tilde(eps)
    if family == "phi-damped":
        phi = testfn.damp_exponential(phi)
    phi = testfn.normalize(phi, nspec)
    if mass > 0.0:
        phi = testfn.dilate(phi, mass)
    rows = [(float(x), float(phi(x))) for x in grid]
    out = _effective(args, cfg, "out-dir", ".")
    path = Path(out) / f"testfn_{family.replace('-', '_')}.csv"
    write_csv(path, ["x", "value"],
              rows, {"family": family, "eps": _fmt(eps), "mass": _fmt(mass)})
    print(path)
    return 0


def cmd_forms_sweep(args, cfg):
    kernel = _effective(args, cfg, "kernel", "carleman")
    if kernel not in ("carleman", "hankel"):
        raise UsageError("--kernel must be carleman or hankel")
    mass = float(_effective(args, cfg, "mass", 1.0, float))
    route = _effective(args, cfg, "route", "all")
    if route not in ("direct", "log", "laplace", "all"):
        raise UsageError("--route must be direct, log, laplace or all")
    eps_list = _float_list(_effective(args, cfg, "eps-list",
                                      ",".join(map(str, DEFAULT_EPS_LIST))))
    spec = _spec_from(args, cfg)
    nspec = QuadratureSpec(panels=48, nodes_per_panel=spec.nodes_per_panel)

    def one(eps):
        out = []
        if kernel == "carleman":
            phi = testfn.normalize(testfn.build_phi_tilde(eps), nspec)
            if route in ("direct", "all"):
                out.append((eps, "direct", forms.carleman_form(phi, spec)))
            if route in ("log", "all"):
                out.append((eps, "log", forms.carleman_form_log(phi, spec)))
        else:
            phi = _massive_profile(eps, mass, nspec)
            if route in ("direct", "all"):
                out.append((eps, "direct", forms.hankel_form(phi, mass, spec)))
            if route in ("laplace", "all"):
                out.append((eps, "laplace", forms.hankel_form_laplace(phi, mass, spec)))
        return out

    rows = []
    for chunk in map_ordered(one, eps_list):
        for eps, rname, fv in chunk:
            rows.append((eps, rname, fv.value, fv.error_estimate, math.pi - fv.value))
    out = _effective(args, cfg, "out-dir", ".")
    path = Path(out) / f"forms_{kernel}.csv"
    write_csv(path, ["eps", "route", "value", "error_estimate", "pi_minus_value"],
              rows, {"kernel": kernel, "mass": _fmt(mass), "route": route,
                     "eps-list": ",".join(map(_fmt, eps_list))})
    print(path)
    return 0


def _bell_sweep_rows(kernel_name, mass, c, eps_list, spec, nspec):
    kern = forms.KernelForm.carleman() if kernel_name == "massless" \
        else forms.KernelForm.hankel(mass)
    limit = bell.limiting_value_general_c(c)

    def one(eps):
        if kernel_name == "massless":
            phi = testfn.normalize(testfn.build_phi_tilde(eps), nspec)
        else:
            phi = _massive_profile(eps, mass, nspec)
        q = testfn.assemble_quadruple(phi, c)
        rep = bell.bell_correlator(q, kern, spec, eps=eps)
        return (eps, c, rep.p_fg.imag, rep.p_fpg.imag, rep.p_fgp.imag,
                rep.p_fpgp.imag, rep.chsh_abs, limit, limit - rep.chsh_abs)

    return map_ordered(one, eps_list)


def cmd_bell_sweep(args, cfg):
    kernel_name = _effective(args, cfg, "kernel", "massless")
    if kernel_name not in ("massless", "massive"):
        raise UsageError("--kernel must be massless or massive")
    mass = float(_effective(args, cfg, "mass", 1.0, float))
    c_raw = _effective(args, cfg, "c", "tsirelson")
    c = testfn.TSIRELSON_C if c_raw == "tsirelson" else float(c_raw)
    eps_list = _float_list(_effective(args, cfg, "eps-list",
                                      ",".join(map(str, DEFAULT_EPS_LIST))))
    spec = _spec_from(args, cfg)
    nspec = QuadratureSpec(panels=48, nodes_per_panel=spec.nodes_per_panel)
    rows = _bell_sweep_rows(kernel_name, mass, c, eps_list, spec, nspec)
    out = _effective(args, cfg, "out-dir", ".")
    path = Path(out) / f"bell_{kernel_name}.csv"
    write_csv(path, ["eps", "c", "p_fg", "p_fpg", "p_fgp", "p_fpgp",
                     "chsh_abs", "limit_formula", "gap_to_limit"],
              rows, {"kernel": kernel_name, "mass": _fmt(mass), "c": _fmt(c),
                     "eps-list": ",".join(map(_fmt, eps_list))})
    print(path)
    return 0


def cmd_compress_sweep(args, cfg):
    depths = _int_list(_effective(args, cfg, "depth-list",
                                  ",".join(map(str, DEFAULT_JK_LIST))))
    spans = _int_list(_effective(args, cfg, "span-list",
                                 ",".join(map(str, DEFAULT_JK_LIST))))
    params = [(J, K) for J in depths for K in spans]
    results = map_ordered(lambda jk: compress.build_compression(*jk), params)
    rows = [(J, K, r.basis.dim, r.lambda_max, math.pi - r.lambda_max)
            for (J, K), r in zip(params, results)]
    out = _effective(args, cfg, "out-dir", ".")
    path = Path(out) / "compression_sweep.csv"
    write_csv(path, ["J", "K", "N", "lambda_max", "pi_gap"], rows,
              {"depth-list": ",".join(map(str, depths)),
               "span-list": ",".join(map(str, spans))})
    dump = _effective(args, cfg, "dump-matrix", None)
    if dump:
        best = results[-1]
        np.savetxt(dump, best.matrix, delimiter=",", fmt="%.17g")
        print(dump)
    print(path)
    return 0


def cmd_appendix_check(args, cfg):
    what = _effective(args, cfg, "what", None)
    choices = ("i1-limit", "i2-self", "i2-vs-config", "fourier-g", "schedule")
    if what not in choices:
        raise UsageError(f"--what must be one of {', '.join(choices)}")
    mass = float(_effective(args, cfg, "mass", 1.0, float))
    eps = float(_effective(args, cfg, "eps", 0.5, float))
    eta_list = _float_list(_effective(args, cfg, "eta-list", "1e-1,3e-2,1e-2,3e-3"))
    delta = float(_effective(args, cfg, "delta", 0.5, float))
    spec = _spec_from(args, cfg)
    nspec = QuadratureSpec(panels=48, nodes_per_panel=spec.nodes_per_panel)
    rows, header, ok = [], None, True

    phi = testfn.normalize(testfn.build_phi_tilde(eps), nspec)
    q = testfn.assemble_quadruple(phi)
    if what == "i1-limit":
        header = ["eta", "i1_self", "deviation_from_norm", "pass"]
        grid = momentum.momentum_grid(phi.lo, phi.hi, mass, spec)
        for eta in eta_list:
            v = momentum.pairing_I1(q.g, q.g, eta, mass, spec, grid=grid)
            dev = abs(v - 1.0)
            good = dev < max(1e-4, 20.0 * eta * eta)
            ok &= good
            rows.append((eta, v, dev, int(good)))
    elif what == "i2-self":
        header = ["eta", "i2_self", "pass"]
        grid = momentum.momentum_grid(phi.lo, phi.hi, mass, spec)
        for eta in eta_list:
            v = momentum.pairing_I2(q.g, q.g, eta, mass, spec, grid=grid)
            good = abs(v) < 1e-10
            ok &= good
            rows.append((eta, v, int(good)))
    elif what == "i2-vs-config":
        header = ["eta", "i2", "config_pairing", "abs_diff", "pass"]
        kern = forms.KernelForm.hankel(mass) if mass > 0 else forms.KernelForm.carleman()
        target = bell.spatial_pairing(q.f, q.g, kern, spec).imag
        grid = momentum.momentum_grid(phi.lo, phi.hi, mass, spec)
        prev = math.inf
        for eta in eta_list:
            v = momentum.pairing_I2(q.f, q.g, eta, mass, spec, grid=grid)
            diff = abs(v - target)
            good = diff <= prev * (1 + 1e-9)
            ok &= good
            prev = diff
            rows.append((eta, v, target, diff, int(good)))
        ok &= prev < 1e-3
    elif what == "fourier-g":
        header = ["k", "m", "deviation", "pass"]
        for k in (0.0, 0.5, 1.0, 2.0, 5.0, 10.0):
            for m in (0.5, 1.0, 2.0):
                d = momentum.fourier_bessel_identity_check(k, m, spec)
                good = d < 1e-8
                ok &= good
                rows.append((k, m, d, int(good)))
    else:
        header = ["delta", "eps", "eta", "chsh_spatial", "chsh_momentum", "pass"]
        res = momentum.eta_eps_schedule_check(delta, spec, mass=0.0)
        good = res.success and TSIRELSON - delta < res.chsh_momentum <= TSIRELSON + 1e-6
        ok &= good
        rows.append((delta, res.eps or math.nan, res.eta or math.nan,
                     res.chsh_spatial or math.nan, res.chsh_momentum or math.nan,
                     int(good)))
    out = _effective(args, cfg, "out-dir", ".")
    path = Path(out) / f"appendix_{what.replace('-', '_')}.csv"
    write_csv(path, header, rows,
              {"what": what, "mass": _fmt(mass), "eps": _fmt(eps),
               "eta-list": ",".join(map(_fmt, eta_list)), "delta": _fmt(delta)})
    print(path)
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# reproduce-paper driver
# ---------------------------------------------------------------------------

def reproduce_paper(out_dir, spec=QuadratureSpec(panels=32), eps_list=DEFAULT_EPS_LIST,
                    jk_list=DEFAULT_JK_LIST, echo=None):
    """Run every sweep, emit CSV/SVG artifacts, and gate on pinned thresholds.

    Thresholds marked 'pinned' are regression constants computed with the
    independent oracle routes of this package; limit statements (Tsirelson
    bound, monotonicity, sandwich) are asserted as stated.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    echo = dict(echo or {})
    echo.setdefault("eps-list", ",".join(map(_fmt, eps_list)))
    echo.setdefault("depth-list", ",".join(map(str, jk_list)))
    echo.setdefault("span-list", ",".join(map(str, jk_list)))
    nspec = QuadratureSpec(panels=48, nodes_per_panel=spec.nodes_per_panel)
    c_star = testfn.TSIRELSON_C
    checks = []

    def check(name, cond, detail):
        checks.append((name, bool(cond), detail))

    eps_sorted = sorted(eps_list, reverse=True)

    # massless sweep
    rows = _bell_sweep_rows("massless", 0.0, c_star, eps_sorted, spec, nspec)
    write_csv(out / "massless_sweep.csv",
              ["eps", "c", "p_fg", "p_fpg", "p_fgp", "p_fpgp", "chsh_abs",
               "limit_formula", "gap_to_limit"], rows, echo)
    chsh = [r[6] for r in rows]
    write_svg(out / "massless_sweep.svg", [r[0] for r in rows], chsh,
              "cutoff parameter", "CHSH value", "massless CHSH vs cutoff",
              logx=True, hline=TSIRELSON)
    check("massless CHSH increases along the sweep",
          all(a < b for a, b in zip(chsh, chsh[1:])), _fmt(chsh))
    check("massless CHSH within Tsirelson bound",
          all(v <= TSIRELSON + 1e-6 for v in chsh), _fmt(max(chsh)))
    check("massless CHSH at smallest cutoff exceeds 2.39 (pinned)",
          chsh[-1] > 2.39, _fmt(chsh[-1]))
    collapse = [abs(r[6] - 4.0 * abs(r[2])) for r in rows]
    check("four-pairing collapse |CHSH - 4|<f|g||| < 1e-8",
          max(collapse) < 1e-8, _fmt(max(collapse)))

    # massive sweep (m = 1)
    mrows = _bell_sweep_rows("massive", 1.0, c_star, eps_sorted, spec, nspec)
    write_csv(out / "massive_sweep.csv",
              ["eps", "c", "p_fg", "p_fpg", "p_fgp", "p_fpgp", "chsh_abs",
               "limit_formula", "gap_to_limit"], mrows, echo)
    mchsh = [r[6] for r in mrows]
    write_svg(out / "massive_sweep.svg", [r[0] for r in mrows], mchsh,
              "cutoff parameter", "CHSH value", "massive (m=1) CHSH vs cutoff",
              logx=True, hline=TSIRELSON)
    check("massive CHSH increases along the sweep",
          all(a < b for a, b in zip(mchsh, mchsh[1:])), _fmt(mchsh))
    check("massive CHSH within Tsirelson bound",
          all(v <= TSIRELSON + 1e-6 for v in mchsh), _fmt(max(mchsh)))
    check("massive CHSH at smallest cutoff exceeds 1.87 (pinned)",
          mchsh[-1] > 1.87, _fmt(mchsh[-1]))

    # sandwich and dilation invariance at each eps
    sandwich_ok, dil_ok = True, True
    for eps in eps_sorted:
        phit = testfn.build_phi_tilde(eps)
        Phi = testfn.normalize(testfn.damp_exponential(phit), nspec)
        qk = forms.hankel_form(Phi, 1.0, spec).value
        i1 = forms.weighted_carleman_bound(phit, 1, spec)
        i2 = forms.weighted_carleman_bound(phit, 2, spec)
        sandwich_ok &= i2 <= qk <= i1
    Phi = testfn.normalize(testfn.damp_exponential(testfn.build_phi_tilde(1e-2)), nspec)
    base = forms.rayleigh_quotient(Phi, forms.KernelForm.hankel(1.0), spec)
    for m in (0.25, 4.0):
        rq = forms.rayleigh_quotient(testfn.dilate(Phi, m),
                                     forms.KernelForm.hankel(m), spec)
        dil_ok &= abs(rq - base) < 1e-8
    check("massive sandwich I2 <= Q_K <= I1 at every eps", sandwich_ok, "")
    check("dilation invariance of the massive quotient < 1e-8", dil_ok, "")

    # general-c table at the smallest eps
    smallest = eps_sorted[-1]
    phi_small = testfn.normalize(testfn.build_phi_tilde(smallest), nspec)
    phi_mid = testfn.normalize(testfn.build_phi_tilde(eps_sorted[-2]), nspec) \
        if len(eps_sorted) > 1 else phi_small
    grows = []
    gap_shrinks = True
    for c in (0.0, 0.1, 0.2, c_star):
        lim = bell.limiting_value_general_c(c)
        small_rep = bell.bell_correlator(testfn.assemble_quadruple(phi_small, c),
                                         forms.KernelForm.carleman(), spec, eps=smallest)
        mid_rep = bell.bell_correlator(testfn.assemble_quadruple(phi_mid, c),
                                       forms.KernelForm.carleman(), spec,
                                       eps=eps_sorted[-2])
        gap_shrinks &= (lim - small_rep.chsh_abs) < (lim - mid_rep.chsh_abs)
        grows.append((c, smallest, small_rep.chsh_abs, lim, lim - small_rep.chsh_abs))
    write_csv(out / "general_c.csv", ["c", "eps", "chsh_abs", "limit", "gap"],
              grows, echo)
    check("general-c gap to the closed-form limit shrinks with eps",
          gap_shrinks, _fmt([g[4] for g in grows]))

    # compression sweep
    params = [(J, K) for J in jk_list for K in jk_list]
    results = map_ordered(lambda jk: compress.build_compression(*jk), params)
    crows = [(J, K, r.basis.dim, r.lambda_max, math.pi - r.lambda_max)
             for (J, K), r in zip(params, results)]
    write_csv(out / "compression_sweep.csv",
              ["J", "K", "N", "lambda_max", "pi_gap"], crows, echo)
    diag = [(r[2], r[3]) for r in crows if r[0] == r[1]]
    write_svg(out / "compression_sweep.svg", [d[0] for d in diag],
              [d[1] for d in diag], "matrix dimension N", "largest eigenvalue",
              "compression spectral edge vs N", logx=True, hline=math.pi)
    lam = {(r[0], r[1]): r[3] for r in crows}
    nested_ok = all(lam[(J, K)] <= lam[(J2, K2)] + 1e-12
                    for (J, K) in lam for (J2, K2) in lam
                    if J2 >= J and K2 >= K)
    check("lambda_max nondecreasing along nested refinements", nested_ok, "")
    check("all lambda_max below pi",
          all(r[3] < math.pi for r in crows), _fmt(max(r[3] for r in crows)))
    top = max(jk_list)
    check(f"pi gap at (J,K)=({top},{top}) below 0.5",
          math.pi - lam[(top, top)] < 0.5, _fmt(math.pi - lam[(top, top)]))

    # appendix checks
    app_rows = []
    phi5 = testfn.normalize(testfn.build_phi_tilde(0.5), nspec)
    q5 = testfn.assemble_quadruple(phi5)
    grid5 = momentum.momentum_grid(phi5.lo, phi5.hi, 1.0, spec)
    i2self = momentum.pairing_I2(q5.g, q5.g, 1e-2, 1.0, spec, grid=grid5)
    check("I2 self-pairing vanishes below 1e-10", abs(i2self) < 1e-10, _fmt(i2self))
    app_rows.append(("i2_self", 1e-2, i2self, 1e-10, int(abs(i2self) < 1e-10)))
    target = bell.spatial_pairing(q5.f, q5.g, forms.KernelForm.hankel(1.0), spec).imag
    prev, mono = math.inf, True
    last_diff = math.nan
    for eta in (1e-1, 3e-2, 1e-2, 3e-3):
        v = momentum.pairing_I2(q5.f, q5.g, eta, 1.0, spec, grid=grid5)
        last_diff = abs(v - target)
        mono &= last_diff <= prev * (1 + 1e-9)
        prev = last_diff
        app_rows.append(("i2_vs_config", eta, v, 1e-3, int(last_diff < 1e-3)))
    check("I2 matches the Bessel configuration pairing at eta=3e-3 within 1e-3",
          mono and last_diff < 1e-3, _fmt(last_diff))
    fg_worst = max(momentum.fourier_bessel_identity_check(k, m, spec)
                   for k in (0.0, 0.5, 1.0, 2.0, 5.0, 10.0) for m in (0.5, 1.0, 2.0))
    check("on-shell Fourier identity holds within 1e-8", fg_worst < 1e-8, _fmt(fg_worst))
    app_rows.append(("fourier_g_worst", 0.0, fg_worst, 1e-8, int(fg_worst < 1e-8)))
    grid0 = momentum.momentum_grid(phi5.lo, phi5.hi, 1e-4, spec)
    v0 = momentum.pairing_I2(q5.f, q5.g, 3e-3, 1e-4, spec, grid=grid0)
    t0 = bell.spatial_pairing(q5.f, q5.g, forms.KernelForm.carleman(), spec).imag
    check("small-mass kernel matches the massless pairing within 1e-3",
          abs(v0 - t0) < 1e-3, _fmt(abs(v0 - t0)))
    app_rows.append(("massless_limit", 1e-4, v0 - t0, 1e-3, int(abs(v0 - t0) < 1e-3)))
    sched = momentum.eta_eps_schedule_check(0.5, spec, mass=0.0)
    sched_ok = sched.success and TSIRELSON - 0.5 < (sched.chsh_momentum or 0.0) \
        <= TSIRELSON + 1e-6
    check("schedule witness momentum CHSH inside (2*sqrt(2)-0.5, 2*sqrt(2)]",
          sched_ok, _fmt(sched.chsh_momentum or math.nan))
    app_rows.append(("schedule", sched.eta or math.nan,
                     sched.chsh_momentum or math.nan, TSIRELSON - 0.5, int(sched_ok)))
    write_csv(out / "appendix_checks.csv",
              ["check", "param", "value", "threshold", "pass"], app_rows, echo)

    failures = [c for c in checks if not c[1]]
    print(f"reproduce-paper: {len(checks) - len(failures)}/{len(checks)} checks passed")
    for name, good, detail in checks:
        tag = "PASS" if good else "FAIL"
        suffix = f"  [{detail}]" if detail else ""
        print(f"  {tag}  {name}{suffix}")
    return 0 if not failures else 1


def cmd_reproduce_paper(args, cfg):
    out = _effective(args, cfg, "out-dir", "paper_out")
    spec = _spec_from(args, cfg)
    eps_list = _float_list(_effective(args, cfg, "eps-list",
                                      ",".join(map(str, DEFAULT_EPS_LIST))))
    jk = _int_list(_effective(args, cfg, "depth-list",
                              ",".join(map(str, DEFAULT_JK_LIST))))
    return reproduce_paper(out, spec, eps_list, jk,
                           echo={"out-dir": str(out)})


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(
        prog="bell-halfline",
        description="Bell-CHSH correlators via Carleman/Hankel forms on the half-line")
    p.add_argument("--config", help="key = value config file; flags override it")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("specfun-table", help="tabulate K0, K1, cosh kernel or smooth step")
    sp.add_argument("--fn", choices=["k0", "k1", "h", "tau"])
    sp.add_argument("--grid", help="start,stop,n,log|lin")
    sp.add_argument("--eps", type=float)
    sp.add_argument("--out-dir")

    sp = sub.add_parser("testfn-sample", help="sample a test-function family")
    sp.add_argument("--family", choices=["phi", "phi-damped"])
    sp.add_argument("--eps", type=float)
    sp.add_argument("--mass", type=float)
    sp.add_argument("--grid")
    sp.add_argument("--out-dir")

    sp = sub.add_parser("forms-sweep", help="quadratic-form values along an eps sweep")
    sp.add_argument("--kernel", choices=["carleman", "hankel"])
    sp.add_argument("--mass", type=float)
    sp.add_argument("--eps-list")
    sp.add_argument("--route", choices=["direct", "log", "laplace", "all"])
    sp.add_argument("--panels", type=int)
    sp.add_argument("--nodes", type=int)
    sp.add_argument("--out-dir")

    sp = sub.add_parser("bell-sweep", help="CHSH correlator sweep")
    sp.add_argument("--kernel", choices=["massless", "massive"])
    sp.add_argument("--mass", type=float)
    sp.add_argument("--c")
    sp.add_argument("--eps-list")
    sp.add_argument("--panels", type=int)
    sp.add_argument("--nodes", type=int)
    sp.add_argument("--out-dir")

    sp = sub.add_parser("compress-sweep", help="Galerkin compression eigenvalue sweep")
    sp.add_argument("--depth-list")
    sp.add_argument("--span-list")
    sp.add_argument("--dump-matrix")
    sp.add_argument("--out-dir")

    sp = sub.add_parser("appendix-check", help="momentum-space equivalence checks")
    sp.add_argument("--what", choices=["i1-limit", "i2-self", "i2-vs-config",
                                       "fourier-g", "schedule"])
    sp.add_argument("--mass", type=float)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--eta-list")
    sp.add_argument("--delta", type=float)
    sp.add_argument("--panels", type=int)
    sp.add_argument("--nodes", type=int)
    sp.add_argument("--out-dir")

    sp = sub.add_parser("reproduce-paper", help="run all sweeps and threshold checks")
    sp.add_argument("--eps-list")
    sp.add_argument("--depth-list")
    sp.add_argument("--panels", type=int)
    sp.add_argument("--nodes", type=int)
    sp.add_argument("--out-dir")
    return p


_DISPATCH = {
    "specfun-table": cmd_specfun_table,
    "testfn-sample": cmd_testfn_sample,
    "forms-sweep": cmd_forms_sweep,
    "bell-sweep": cmd_bell_sweep,
    "compress-sweep": cmd_compress_sweep,
    "appendix-check": cmd_appendix_check,
    "reproduce-paper": cmd_reproduce_paper,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = parse_config(args.config) if args.config else {}
        return _DISPATCH[args.command](args, cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FloatingPointError, MemoryError, ValueError, ArithmeticError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
