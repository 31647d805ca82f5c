"""qsphere command-line front end.

    qsphere verify [relations|decompositions|commutators|seminorms|all]
    qsphere dimension-spectrum [--torus-identity] [--symbol FILE ...]
    qsphere decay [--j J] [--cutoffs 6,8,10] [--table]
    qsphere cg-table [--i I] [--tableau JSON]
    qsphere operator-dump --op Y2

Shared flags: --q --ell --cutoff --tol --format json|csv --out --seed --config.
A config file is INI text with a [common] section and one section per command;
values given on the command line win over the file, the file over built-in defaults.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import sys
from fractions import Fraction

import numpy as np

from .errors import AccuracyError, ConsistencyError, QSphereError
from .qcore import QContext

SCHEMA_VERSION = 1
MAX_DIM = 3_000_000

DEFAULTS = {
    "q": 0.5,
    "ell": 2,
    "cutoff": 8,
    "tol": 1e-12,
    "format": "json",
    "out": None,
    "seed": 0,
    # command specific
    "check": "all",
    "samples": 20,
    "symbol": [],
    "torus_identity": False,
    "j": None,
    "cutoffs": "6,8,10",
    "table": False,
    "i": None,
    "tableau": None,
    "op": None,
}


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ output

def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    return str(v)


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _json(payload):
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _params(cfg, *keys):
    return {k: cfg[k] for k in keys}


def _report(cmd, cfg, results, ok, extra=None):
    d = {"schema_version": SCHEMA_VERSION, "command": cmd,
         "params": _params(cfg, "q", "ell", "cutoff", "tol", "seed"),
         "results": results, "pass": bool(ok)}
    if extra:
        d.update(extra)
    return d


def _emit(text, cfg):
    if cfg["out"]:
        with open(cfg["out"], "w", newline="") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _ctx(cfg, **kw):
    d = dict(q=cfg["q"], ell=cfg["ell"], cutoff=cfg["cutoff"], tol=cfg["tol"])
    d.update(kw)
    return QContext(**d)


def _guard_full(ctx):
    c, ell = ctx.cutoff, ctx.ell
    dim = (c + 1) ** (2 * ell) * (2 * c + 1)
    if dim > MAX_DIM:
        raise UsageError(f"full truncated space has dim {dim} > {MAX_DIM}; lower --cutoff or --ell")


def _check(name, params, dev, thr):
    dev = float(dev)
    return {"check": name, "params": params, "max_deviation": dev, "threshold": float(thr),
            "pass": bool(dev <= thr)}


# ------------------------------------------------------------------ verify

def _verify_relations(cfg):
    from .equivariant_triple import EquivariantGenerators
    from .operators import TruncatedSpace
    from .torus_triple import relation_defects, torus_generators

    ctx = _ctx(cfg)
    out = []
    sp_t = TruncatedSpace.torus(ctx)
    defects = relation_defects(torus_generators(ctx, sp_t), ctx)
    p = {"family": "Y", "q": ctx.q, "ell": ctx.ell, "cutoff": ctx.cutoff}
    out.append(_check("sphere relations", p, max(d.max_abs() for d in defects.values()), ctx.tol))
    if ctx.ell >= 2:
        _guard_full(ctx)
        gens = EquivariantGenerators.build(ctx)
        defects = relation_defects(gens.Z, ctx)
        p = {"family": "Z", "source": gens.provenance[0], "q": ctx.q, "ell": ctx.ell, "cutoff": ctx.cutoff}
        out.append(_check("sphere relations", p, max(d.max_abs() for d in defects.values()), ctx.tol))
        out.append(_check("GT weight homogeneity", p, gens.homogeneity_violations(), 0))
    return out


def _verify_decompositions(cfg):
    from .equivariant_triple import (build_U, build_Z_q0, conjugate_U, model_Y_star,
                                     st_decomposition_check)
    from .operators import TruncatedSpace, _deq_from_decomposition, _deq_from_labels

    ctx = _ctx(cfg)
    if ctx.ell < 2:
        raise UsageError("decomposition checks need --ell >= 2")
    _guard_full(ctx)
    out = []
    ctx0 = ctx.with_(q=0.0)
    space = TruncatedSpace.full(ctx0)
    U = build_U(ctx0, space)
    for j in range(1, ctx.ell + 2):
        R = conjugate_U(build_Z_q0(j, ctx0, space), U) - model_Y_star(j, ctx0, space)
        p = {"j": j, "q": 0.0, "ell": ctx.ell, "cutoff": ctx.cutoff}
        out.append(_check("U Z*_j0 U* = Y*_j0 (x) I", p, R.max_abs(), 0.0))
    d1 = _deq_from_labels(space.basis)
    d2 = _deq_from_decomposition(space.basis, ctx.ell)
    p = {"ell": ctx.ell, "cutoff": ctx.cutoff}
    out.append(_check("D_eq label form = split form", p, np.max(np.abs(d1 - d2)), 0.0))
    if ctx.q > 0:
        for j in range(1, ctx.ell + 2):
            st = st_decomposition_check(j, ctx, TruncatedSpace.full(ctx))
            p = {"j": j, "q": ctx.q, "ell": ctx.ell, "cutoff": ctx.cutoff}
            out.append(_check("Z*_j = sum_M S_M T_M", p, st.reassembly, ctx.tol))
    return out


def _verify_commutators(cfg):
    from .equivariant_triple import EquivariantGenerators
    from .operators import TruncatedSpace, commutator, dirac_equivariant, dirac_torus, op_norm
    from .torus_triple import torus_generators

    ctx = _ctx(cfg)
    out = []
    c = ctx.cutoff
    # bounded commutators converge geometrically in the cutoff; unbounded ones grow at least linearly
    thr = max(1e-6, ctx.q ** (c - 2))
    norms = {}
    for cc in (c, c + 4):
        cx = ctx.with_(cutoff=cc)
        sp_t = TruncatedSpace.torus(cx)
        D, _, _ = dirac_torus(sp_t)
        norms[cc] = [op_norm(commutator(D, Y)) for Y in torus_generators(cx, sp_t)]
    for j in range(1, ctx.ell + 2):
        a, b = norms[c][j - 1], norms[c + 4][j - 1]
        p = {"family": "Y", "j": j, "q": ctx.q, "ell": ctx.ell, "cutoffs": [c, c + 4], "norm": b}
        out.append(_check("[D, Y_j] bounded (cutoff-stable norm)", p, abs(b - a), thr))
    if ctx.ell >= 2 and c >= 4:
        _guard_full(ctx)
        norms = {}
        for cc in (c - 2, c):
            cx = ctx.with_(cutoff=cc)
            space = TruncatedSpace.full(cx)
            D, _, _ = dirac_equivariant(space)
            gens = EquivariantGenerators.build(cx, space)
            norms[cc] = [op_norm(commutator(D, Z)) for Z in gens.Z]
        for j in range(1, ctx.ell + 2):
            a, b = norms[c - 2][j - 1], norms[c][j - 1]
            p = {"family": "Z", "j": j, "q": ctx.q, "ell": ctx.ell, "cutoffs": [c - 2, c], "norm": b}
            out.append(_check("[D_eq, Z_j] bounded (cutoff-stable norm)", p, abs(b - a), thr))
    return out


def _verify_seminorms(cfg):
    from .operators import TruncatedSpace, op_norm
    from .torus_triple import CanonicalElement, canonical_seminorm, canonical_to_operator

    rng = np.random.default_rng(cfg["seed"])
    out = []
    for ell in range(0, min(cfg["ell"], 2) + 1):
        ctx = _ctx(cfg, ell=ell, cutoff=6)
        space = TruncatedSpace.torus(ctx)
        worst_norm, worst_adj = -np.inf, 0.0
        for _ in range(cfg["samples"]):
            a = CanonicalElement.random(ell, 2, rng)
            worst_norm = max(worst_norm, op_norm(canonical_to_operator(a, space)) - canonical_seminorm(a, 0))
            for m in range(3):
                s1, s2 = canonical_seminorm(a, m), canonical_seminorm(a.adjoint(), m)
                worst_adj = max(worst_adj, abs(s1 - s2) / max(s1, 1.0))
        p = {"ell": ell, "cutoff": 6, "samples": cfg["samples"], "seed": cfg["seed"]}
        out.append(_check("op_norm(a) <= ||a||_0", p, max(worst_norm, 0.0), 1e-12))
        out.append(_check("||a*||_m = ||a||_m", p, worst_adj, 1e-12))
    return out


VERIFY = {
    "relations": _verify_relations,
    "decompositions": _verify_decompositions,
    "commutators": _verify_commutators,
    "seminorms": _verify_seminorms,
}


def cmd_verify(cfg):
    names = list(VERIFY) if cfg["check"] == "all" else [cfg["check"]]
    results = []
    for n in names:
        for r in VERIFY[n](cfg):
            r["group"] = n
            results.append(r)
    ok = all(r["pass"] for r in results)
    if cfg["format"] == "csv":
        rows = [(r["group"], r["check"], json.dumps(r["params"], sort_keys=True), r["max_deviation"],
                 r["threshold"], r["pass"]) for r in results]
        text = _csv(["group", "check", "params", "max_deviation", "threshold", "pass"], rows)
    else:
        text = _json(_report("verify", cfg, results, ok))
    return text, ok


# ------------------------------------------------------ dimension spectrum

def _parse_key(key, where):
    key = key.strip()
    if key == "":
        return ()
    try:
        return tuple(int(x) for x in key.split(","))
    except ValueError:
        raise UsageError(f"{where}: support key {key!r} is not a comma-separated list of integers") from None


def _parse_value(v, where):
    try:
        return Fraction(v) if isinstance(v, str) else Fraction(v).limit_denominator(10**12)
    except (ValueError, TypeError, ZeroDivisionError):
        raise UsageError(f"{where}: value {v!r} is not a number or 'p/q' string") from None


def load_symbol(path):
    """Read a symbol file; returns (label, ZetaCombination)."""
    from .spectral_zeta import RapidDecaySymbol, lemma_dimension_decompose, trace_torus_symbolic

    try:
        with open(path) as f:
            text = f.read()
    except OSError as e:
        raise UsageError(f"{path}: cannot read symbol file ({e.strerror})") from None
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None
    if not isinstance(d, dict):
        raise UsageError(f"{path}: at $: expected an object")
    kind = d.get("kind", "torus")
    label = d.get("name", path)
    try:
        if kind == "torus":
            ell = d.get("ell")
            if not isinstance(ell, int) or ell < 0:
                raise UsageError(f"{path}: at $.ell: expected a nonnegative integer")
            levels = d.get("levels")
            if not isinstance(levels, dict):
                raise UsageError(f"{path}: at $.levels: expected an object")
            phi = {}
            for i, vals in levels.items():
                where = f"{path}: at $.levels.{i}"
                if not isinstance(vals, dict):
                    raise UsageError(f"{where}: expected an object")
                try:
                    lvl = int(i)
                except ValueError:
                    raise UsageError(f"{where}: level must be an integer") from None
                phi[lvl] = {_parse_key(k, where): _parse_value(v, f"{where}.{k}") for k, v in vals.items()}
            zc = trace_torus_symbolic(phi, ell, with_sign=bool(d.get("with_sign", False)),
                                      include_kernel=bool(d.get("include_kernel", False)))
        elif kind == "rapid-decay":
            vals = d.get("values")
            if not isinstance(vals, dict):
                raise UsageError(f"{path}: at $.values: expected an object")
            where = f"{path}: at $.values"
            sym = RapidDecaySymbol(int(d.get("support_dims", 0)),
                                   {_parse_key(k, where): _parse_value(v, f"{where}.{k}") for k, v in vals.items()},
                                   int(d.get("free_dims", 0)))
            zc = lemma_dimension_decompose(sym)
        else:
            raise UsageError(f"{path}: at $.kind: unknown symbol kind {kind!r}")
    except QSphereError as e:
        raise UsageError(f"{path}: {e}") from None
    return label, zc


def _residue_rows(label, zc, check_positive=False):
    rows = []
    for p, res in zc.residues().items():
        num = zc.numeric_residue(p)
        rows.append({"source": label, "pole": p, "residue": str(res), "residue_value": float(res),
                     "numeric_residue": num, "abs_error": abs(num - float(res)),
                     "positive": bool(res > 0) if check_positive else None})
    return rows


def cmd_dimension_spectrum(cfg):
    from .spectral_zeta import trace_Deq_symbolic, trace_torus_symbolic

    ell = cfg["ell"]
    if ell < 1:
        raise UsageError("dimension-spectrum needs --ell >= 1")
    sources = [(f"|D_eq| ell={ell}", trace_Deq_symbolic(ell), True)]
    if cfg["torus_identity"]:
        sources.append((f"torus identity ell={ell}", trace_torus_symbolic({0: {(): 1}}, ell), False))
    for path in cfg["symbol"]:
        label, zc = load_symbol(path)
        sources.append((label, zc, False))
    rows, combos = [], {}
    for label, zc, pos in sources:
        rows.extend(_residue_rows(label, zc, pos))
        combos[label] = zc.to_dict()
    thr = 1e-6
    ok = all(r["abs_error"] <= thr for r in rows) and all(r["positive"] is not False for r in rows)
    exp = list(range(1, 2 * ell + 2))
    deq_poles = [r["pole"] for r in rows if r["source"] == sources[0][0]]
    ok = ok and deq_poles == exp
    if cfg["format"] == "csv":
        text = _csv(["source", "pole", "residue", "residue_value", "numeric_residue", "abs_error"],
                    [(r["source"], r["pole"], r["residue"], r["residue_value"], r["numeric_residue"],
                      r["abs_error"]) for r in rows])
    else:
        text = _json(_report("dimension-spectrum", cfg, rows, ok,
                             {"zeta_combinations": combos, "numeric_threshold": thr}))
    return text, ok


# ------------------------------------------------------------------ decay

def _int_list(s):
    try:
        out = [int(x) for x in str(s).split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {s!r}") from None
    if not out:
        raise UsageError("empty integer list")
    return out


def cmd_decay(cfg):
    from .equivariant_triple import decay_report, decay_table, residual

    ctx = _ctx(cfg)
    if ctx.ell < 2:
        raise UsageError("decay needs --ell >= 2")
    if ctx.q == 0:
        raise UsageError("decay needs q in (0, 1)")
    cutoffs = _int_list(cfg["cutoffs"])
    for c in cutoffs:
        _guard_full(ctx.with_(cutoff=c))
    js = [cfg["j"]] if cfg["j"] is not None else list(range(1, ctx.ell + 2))
    for j in js:
        if not 1 <= j <= ctx.ell + 1:
            raise UsageError(f"--j must lie in 1..{ctx.ell + 1}")

    if cfg["table"]:
        _guard_full(ctx)
        rows = []
        for j in js:
            name = "zx" if j <= ctx.ell else "zy"
            for r in decay_table(residual(name, j, ctx), ctx):
                rows.append((j, ctx.cutoff, name) + r)
        hdr = ["j", "cutoff", "residual", "col_gamma", "row_gamma", "weight", "entry", "entry_over_q_weight"]
        if cfg["format"] == "csv":
            return _csv(hdr, rows), True
        return _json(_report("decay", cfg, [dict(zip(hdr, r)) for r in rows], True)), True

    results = []
    ok = True
    for j in js:
        name = "zx" if j <= ctx.ell else "zy"
        reps = []
        for c in cutoffs:
            cx = ctx.with_(cutoff=c)
            reps.append((c, decay_report(residual(name, j, cx), cx)))
        Cs = [r.C_fit for _, r in reps]
        spread = (max(Cs) - min(Cs)) / max(Cs) if max(Cs) > 0 else 0.0
        stable = spread <= 1e-2
        for c, r in reps:
            cert = r.certified() and stable
            ok &= cert
            results.append({"j": j, "residual": name, "cutoff": c, "C_fit": r.C_fit,
                            "alpha_fit": r.alpha_fit, "alpha_loglinear": r.alpha_loglinear, "nnz": r.nnz, "C_spread": spread,
                            "certified": bool(cert)})
    if cfg["format"] == "csv":
        hdr = ["j", "residual", "cutoff", "C_fit", "alpha_fit", "alpha_loglinear", "nnz", "C_spread", "certified"]
        text = _csv(hdr, [[r[h] for h in hdr] for r in results])
    else:
        text = _json(_report("decay", cfg, results, ok, {"alpha_min": 0.98, "spread_max": 1e-2}))
    return text, ok


# ---------------------------------------------------------------- cg table

def staircase_tableau(ell):
    """Tableau with r_ab = 2(ell+1-b) - (a-1); every move keeps it valid."""
    return tuple(tuple(2 * (ell + 1 - b) - (a - 1) for b in range(1, ell + 3 - a)) for a in range(1, ell + 2))


def cmd_cg_table(cfg):
    from .cg import cg_direct, cg_factorized_batch
    from .tableaux import apply_move_array, enumerate_moves, rows_to_array, validate_tableau

    ctx = _ctx(cfg)
    if ctx.q == 0:
        raise UsageError("cg-table needs q in (0, 1)")
    ell = ctx.ell
    if ell < 1:
        raise UsageError("cg-table needs --ell >= 1")
    i = cfg["i"] if cfg["i"] is not None else ell + 1
    if not 1 <= i <= ell + 1:
        raise UsageError(f"--i must lie in 1..{ell + 1}")
    if cfg["tableau"]:
        src = cfg["tableau"]
        if src.startswith("@"):
            with open(src[1:]) as f:
                src = f.read()
        try:
            d = json.loads(src)
        except json.JSONDecodeError as e:
            raise UsageError(f"--tableau:{e.lineno}:{e.colno}: {e.msg}") from None
        if d.get("ell") != ell:
            raise UsageError(f"--tableau has ell={d.get('ell')}, expected {ell}")
        rows = tuple(tuple(r) for r in d["rows"])
    else:
        rows = staircase_tableau(ell)
    try:
        validate_tableau(rows)
    except QSphereError as e:
        raise UsageError(f"--tableau: {e}") from None
    arr = rows_to_array(rows)
    out = []
    for M in enumerate_moves(i, ctx):
        _, ok = apply_move_array(arr, M)
        sgn, expo, L, val = cg_factorized_batch(i, arr, M, ctx)
        direct = cg_direct(i, arr, M, ctx)
        out.append({"i": i, "M": str(M), "valid": bool(ok), "sign": int(sgn), "q_exponent": int(expo),
                    "L": float(L), "value": float(val), "direct": direct})
    dev = max(abs(r["value"] - r["direct"]) / max(1.0, abs(r["direct"])) for r in out)
    ok = dev <= 1e-12
    if cfg["format"] == "csv":
        hdr = ["i", "M", "valid", "sign", "q_exponent", "L", "value", "direct"]
        text = _csv(hdr, [[r[h] for h in hdr] for r in out])
    else:
        text = _json(_report("cg-table", cfg, out, ok, {"tableau": [list(r) for r in rows],
                                                        "max_relative_deviation": dev}))
    return text, ok


# ------------------------------------------------------------ operator dump

def _build_named(name, ctx):
    from .equivariant_triple import build_U, build_X, build_Z_cg, build_Z_q0
    from .operators import TruncatedSpace, dirac_equivariant, dirac_torus
    from .torus_triple import build_Y

    def idx(prefix):
        try:
            return int(name[len(prefix):])
        except ValueError:
            raise UsageError(f"operator {name!r}: expected {prefix}<j>") from None

    if name.startswith("Y"):
        return build_Y(idx("Y"), ctx)
    if name in ("Dtorus", "absDtorus"):
        D, A, _ = dirac_torus(TruncatedSpace.torus(ctx))
        return D if name == "Dtorus" else A
    _guard_full(ctx)
    if name.startswith("Zstar"):
        j = idx("Zstar")
        return build_Z_q0(j, ctx) if ctx.q == 0 else build_Z_cg(j, ctx)
    if name.startswith("X"):
        return build_X(idx("X"), ctx)
    if name == "U":
        return build_U(ctx)
    if name == "Deq":
        return dirac_equivariant(TruncatedSpace.full(ctx))[0]
    raise UsageError(f"unknown operator {name!r}; use Y<j>, Zstar<j>, X<j>, U, Deq, Dtorus or absDtorus")


def cmd_operator_dump(cfg):
    if not cfg["op"]:
        raise UsageError("operator-dump needs --op")
    ctx = _ctx(cfg)
    T = _build_named(cfg["op"], ctx)
    if cfg["format"] == "csv":
        return T.to_csv(), True
    r, c, v = T.triplets()
    entries = [[T.space.gamma_str(a), T.space.gamma_str(b), float(x)] for a, b, x in zip(r, c, v)]
    return _json(_report("operator-dump", cfg, entries, True,
                         {"operator": cfg["op"], "index_set": list(T.space.index_set),
                          "dim": T.space.dim, "nnz": T.nnz})), True


COMMANDS = {
    "verify": cmd_verify,
    "dimension-spectrum": cmd_dimension_spectrum,
    "decay": cmd_decay,
    "cg-table": cmd_cg_table,
    "operator-dump": cmd_operator_dump,
}


# ------------------------------------------------------------------ parsing

def _flag(s):
    s = str(s).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


CONVERT = {"q": float, "ell": int, "cutoff": int, "tol": float, "seed": int, "samples": int,
           "j": int, "i": int, "torus_identity": _flag, "table": _flag,
           "symbol": lambda s: [x.strip() for x in s.split(",") if x.strip()]}


def _common(p):
    p.add_argument("--q", type=float, help="deformation parameter in [0, 1)")
    p.add_argument("--ell", type=int, help="rank")
    p.add_argument("--cutoff", type=int, help="truncation |gamma_i| <= cutoff (>= 2)")
    p.add_argument("--tol", type=float, help="tolerance for exact-identity checks")
    p.add_argument("--format", choices=["json", "csv"])
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--seed", type=int, help="seed for randomized checks")
    p.add_argument("--config", help="INI config file")


def build_parser():
    parser = argparse.ArgumentParser(prog="qsphere", description="Quantum odd sphere spectral triple toolkit.")
    parser.add_argument("--config", dest="config_global", help="INI config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="relation, decomposition, commutator and seminorm checks")
    p.add_argument("check", nargs="?", choices=list(VERIFY) + ["all"])
    p.add_argument("--samples", type=int, help="random elements per rank for the seminorm check")
    _common(p)

    p = sub.add_parser("dimension-spectrum", help="residue tables of spectral zeta functions")
    p.add_argument("--symbol", action="append", help="JSON symbol file (repeatable)")
    p.add_argument("--torus-identity", action="store_const", const=True, help="also tabulate the identity torus symbol")
    _common(p)

    p = sub.add_parser("decay", help="fitted decay of the CG-built generator residuals")
    p.add_argument("--j", type=int, help="generator index (default: all)")
    p.add_argument("--cutoffs", help="comma-separated cutoffs for the stability test")
    p.add_argument("--table", action="store_const", const=True, help="emit the entry table at --cutoff instead")
    _common(p)

    p = sub.add_parser("cg-table", help="CG coefficients of every move in M_i for one tableau")
    p.add_argument("--i", type=int, help="move level (default ell+1)")
    p.add_argument("--tableau", help='JSON {"ell":L,"rows":[...]} or @file')
    _common(p)

    p = sub.add_parser("operator-dump", help="export an operator as sparse triplets")
    p.add_argument("--op", help="Y<j>, Zstar<j>, X<j>, U, Deq, Dtorus or absDtorus")
    _common(p)
    return parser


def resolve_config(args):
    """Merge flags > config file > defaults into a plain dict."""
    cmd = args.command
    path = args.config or args.config_global
    filecfg = {}
    if path:
        cp = configparser.ConfigParser()
        try:
            with open(path) as f:
                cp.read_file(f)
        except OSError as e:
            raise UsageError(f"{path}: cannot read config ({e.strerror})") from None
        except configparser.Error as e:
            raise UsageError(f"{path}: {e}") from None
        for section in ("common", cmd):
            if cp.has_section(section):
                for k, v in cp.items(section):
                    k = k.replace("-", "_")
                    if k not in DEFAULTS:
                        raise UsageError(f"{path}: [{section}] unknown key {k!r}")
                    try:
                        filecfg[k] = CONVERT.get(k, str)(v)
                    except ValueError as e:
                        raise UsageError(f"{path}: [{section}] {k}: {e}") from None
    cfg = dict(DEFAULTS)
    cfg.update(filecfg)
    for k, v in vars(args).items():
        if k in DEFAULTS and v is not None:
            cfg[k] = v
    if cfg["format"] not in ("json", "csv"):
        raise UsageError(f"format must be json or csv, got {cfg['format']!r}")
    _ctx(cfg)  # QContext invariants hold before any computation
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        cfg = resolve_config(args)
        text, ok = COMMANDS[args.command](cfg)
    except UsageError as e:
        print(f"qsphere: error: {e}", file=sys.stderr)
        return 2
    except (ConsistencyError, AccuracyError) as e:
        print(f"qsphere: check failed: {e}", file=sys.stderr)
        return 1
    except QSphereError as e:
        print(f"qsphere: error: {e}", file=sys.stderr)
        return 2
    _emit(text, cfg)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
