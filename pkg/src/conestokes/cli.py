"""Command-line front end.

Every command writes ``<outdir>/<name>.json`` (and a CSV where tabular data
exist) and prints a short summary. Exit codes: 0 success, 2 invalid input,
3 numerical failure, 4 experiment verdict FAIL.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

SCHEMA = 1
EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_FAIL = 0, 2, 3, 4


class ValidationError(ValueError):
    pass


@dataclass
class RunConfig:
    """Fully resolved inputs of one CLI invocation."""

    command: str
    theta0: Optional[float] = None
    outdir: str = "out"
    seed: int = 0
    workers: int = 1
    options: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.theta0 is not None and not (0.0 < self.theta0 < math.pi):
            raise ValidationError("--theta0 must lie in (0, pi) radians")
        if self.workers < 1:
            raise ValidationError("--workers must be positive")


# ----------------------------------------------------------------------------
# argument parsing helpers
# ----------------------------------------------------------------------------


def _pair(text: str) -> tuple[float, float]:
    parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    a, b = (float(p) for p in parts)
    if not (math.isfinite(a) and math.isfinite(b)) or b <= a:
        raise argparse.ArgumentTypeError(f"need a < b, got {text!r}")
    return a, b


def _int_pair(text: str) -> tuple[int, int]:
    a, b = _pair(text)
    if a != int(a) or b != int(b):
        raise argparse.ArgumentTypeError("window bounds must be integers")
    return int(a), int(b)


def _triple(text: str) -> tuple[float, float, float]:
    parts = [float(p) for p in text.split(",") if p.strip()]
    if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
        raise argparse.ArgumentTypeError("expected a,b,step with a <= b and step > 0")
    return parts[0], parts[1], parts[2]


def _dyadic_exponents(text: str) -> list[int]:
    """'2^-4..2^-12', '2^3..2^10' or a comma list of powers of two -> exponents."""
    t = text.replace(" ", "")
    m = re.fullmatch(r"2\^(-?\d+)\.\.2\^(-?\d+)", t)
    if m:
        a, b = int(m.group(1)), int(m.group(2))
        step = 1 if b >= a else -1
        return list(range(a, b + step, step))
    out = []
    for part in t.split(","):
        if part.startswith("2^"):
            out.append(int(part[2:]))
            continue
        v = float(part)
        e = math.log2(v) if v > 0 else math.nan
        if not math.isfinite(e) or abs(e - round(e)) > 1e-12:
            raise argparse.ArgumentTypeError(f"{part} is not a power of two")
        out.append(int(round(e)))
    return out


def _complex(text: str) -> complex:
    t = text.strip().replace(" ", "").replace("i", "j")
    if t in ("j", "+j"):
        return 1j
    if t == "-j":
        return -1j
    return complex(t)


def _floats(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p.strip()]


def _ints(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p.strip()]


def read_config(path: str) -> dict:
    """Plain ``key = value`` lines; '#' starts a comment; keys mirror flag names."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{n}: expected key=value")
            k, v = (x.strip() for x in line.split("=", 1))
            out[k.lstrip("-").replace("-", "_")] = v
    return out


# ----------------------------------------------------------------------------
# output
# ----------------------------------------------------------------------------


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if hasattr(obj, "item") and callable(obj.item):
        return _clean(obj.item())
    return obj


def _write(cfg: RunConfig, name: str, payload: dict, rows: Optional[list] = None) -> str:
    os.makedirs(cfg.outdir, exist_ok=True)
    doc = {"schema": SCHEMA, "command": cfg.command, "seed": cfg.seed, **payload}
    path = os.path.join(cfg.outdir, f"{name}.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_clean(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")
    if rows:
        with open(os.path.join(cfg.outdir, f"{name}.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            for r in rows:
                w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    return path


def _table(title: str, items: Sequence[tuple]) -> None:
    print(title)
    width = max((len(str(k)) for k, _ in items), default=0)
    for k, v in items:
        if isinstance(v, float):
            v = f"{v:.10g}"
        print(f"  {str(k).ljust(width)}  {v}")


def _digest(payload) -> str:
    import hashlib

    return hashlib.sha256(json.dumps(_clean(payload), sort_keys=True).encode()).hexdigest()[:16]


# ----------------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------------


def _cone(cfg: RunConfig):
    from .cone import CircularCone

    if cfg.theta0 is None:
        raise ValidationError("--theta0 is required")
    return CircularCone(cfg.theta0)


def _pencil_data(cfg: RunConfig):
    from .solvability import PencilData, pencil_data_for_cone

    o = cfg.options
    if o.get("lambda1") is not None or o.get("mu2") is not None:
        if o.get("lambda1") is None or o.get("mu2") is None:
            raise ValidationError("--lambda1 and --mu2 must be given together")
        return PencilData(float(o["lambda1"]), float(o["mu2"]), metadata={"source": "user constants"})
    return pencil_data_for_cone(_cone(cfg), int(o.get("m_max", 6)), int(o.get("resolution", 64)), cfg.workers)


def cmd_pencil(cfg: RunConfig) -> int:
    from .neumann import neumann_spectrum
    from .stokes import stokes_spectrum

    o = cfg.options
    cone = _cone(cfg)
    if o["which"] == "neumann":
        window = o.get("window") or (-4.0, 2.0)
        sp = neumann_spectrum(cone, int(o["m_max"]), window, float(o.get("tol") or 1e-10))
    else:
        window = o.get("window") or (-2.0, 1.6)
        sp = stokes_spectrum(
            cone, int(o["m_max"]), window, resolution=int(o["resolution"]), workers=cfg.workers, seed=cfg.seed
        )
    rows = [["value", "m", "multiplicity", "residual"]] + [[e.value, e.m, e.multiplicity, e.residual] for e in sp.entries]
    _write(cfg, f"pencil_{o['which']}", {"spectrum": sp.to_dict(), "pencil_digest": sp.digest()}, rows)
    _table(f"{o['which']} pencil, theta0 = {cone.theta0:.10g}", [(f"m={e.m}", e.value) for e in sp.entries])
    return EXIT_OK


def cmd_intervals(cfg: RunConfig) -> int:
    from .solvability import isomorphism_intervals

    pd = _pencil_data(cfg)
    iv = isomorphism_intervals(pd)
    payload = {
        "theta0": cfg.theta0,
        "lambda1_plus": pd.lambda1_plus,
        "mu2_plus": pd.mu2_plus,
        "intervals": {"isomorphism": list(iv[0]), "isomorphism_onto_mean_zero": list(iv[1])},
        "pencil": pd.to_dict(),
        "pencil_digest": pd.digest(),
    }
    _write(cfg, "intervals", payload)
    _table("isomorphism intervals", [("lambda1+", pd.lambda1_plus), ("mu2+", pd.mu2_plus), ("I1", str(iv[0])), ("I2", str(iv[1]))])
    return EXIT_OK


def cmd_classify(cfg: RunConfig) -> int:
    from .solvability import classify_operator

    o = cfg.options
    pd = _pencil_data(cfg)
    if (o.get("beta") is None) == (o.get("sweep") is None):
        raise ValidationError("give exactly one of --beta or --sweep")
    if o.get("beta") is not None:
        betas = [float(o["beta"])]
    else:
        a, b, step = o["sweep"]
        n = int(math.floor((b - a) / step + 1e-9)) + 1
        betas = [a + i * step for i in range(n)]
    verdicts = [classify_operator(b, pd) for b in betas]
    rows = [["beta", "classification", "rule", "justification"]] + [[v.beta, v.classification, v.rule, v.justification] for v in verdicts]
    _write(
        cfg,
        "classify",
        {"verdicts": [v.to_dict() for v in verdicts], "pencil": pd.to_dict(), "pencil_digest": pd.digest()},
        rows if len(verdicts) > 1 else None,
    )
    _table("classification", [(f"beta={v.beta:.6g}", f"{v.classification} ({v.justification})") for v in verdicts[:40]])
    return EXIT_OK


def cmd_shift(cfg: RunConfig) -> int:
    from .solvability import regularity_shift_ok

    o = cfg.options
    pd = _pencil_data(cfg)
    v = regularity_shift_ok(float(o["beta"]), float(o["gamma"]), pd, bool(o.get("mean_zero")))
    _write(
        cfg,
        "shift",
        {"beta": o["beta"], "gamma": o["gamma"], "mean_zero": bool(o.get("mean_zero")), "allowed": v.allowed,
         "justification": v.justification, "pencil_digest": pd.digest()},
    )
    _table("regularity shift", [("allowed", str(v.allowed)), ("why", v.justification)])
    return EXIT_OK


def _stokes_mode(cone, lam: float, m: Optional[int], m_max: int, resolution: int, workers: int):
    """Locate the Stokes eigenvalue nearest ``lam`` and return a velocity-carrying eigenpair."""
    from .stokes import stokes_eigenvector, stokes_spectrum

    lo, hi = max(-2.0, lam - 0.02), min(1.6, lam + 0.02)
    sp = stokes_spectrum(cone, m_max, (lo, hi), resolution=resolution, workers=workers, validate=False)
    cands = [e for e in sp.entries if abs(e.value - lam) < 1e-3 and (m is None or e.m == m)]
    if not cands:
        raise ArithmeticError(f"no Stokes eigenvalue within 1e-3 of {lam}")
    best = None
    for e in sorted(cands, key=lambda e: (abs(e.value - lam) > 1e-8, e.m)):
        eig = stokes_eigenvector(cone, e.value, e.m, resolution, e.multiplicity)
        if eig.scale()[0] > 1e-6:
            return eig
        best = best or eig
    return best


def cmd_sharpness(cfg: RunConfig) -> int:
    from . import sharpness as S

    o = cfg.options
    exp = o["experiment"]
    # the scaling identity is checked on the half-space cone unless one is given
    cone = None if exp == "scaling" and cfg.theta0 is None else _cone(cfg)
    name = f"sharpness_{exp}"
    if exp == "l6b":
        if any(e > -2 for e in o["eps"]):
            raise ValidationError("eps values must be at most 2^-2")
        ks = [-e for e in o["eps"]]
        eig = _stokes_mode(cone, float(o["lam"]), o.get("m"), int(o["m_max"]), int(o["resolution"]), cfg.workers)
        fit = S.run_l6b_experiment(cone, eig, o.get("beta"), ks, _complex(str(o["s"])), workers=cfg.workers)
        ok = fit.divergent()
        summary = fit.to_dict()
        if o.get("control_beta") is not None:
            ctl = S.run_l6b_experiment(cone, eig, float(o["control_beta"]), ks, _complex(str(o["s"])), workers=cfg.workers)
            summary["control"] = ctl.to_dict()
            summary["control"]["flat"] = ctl.flat()
            ok = ok and ctl.flat()
        verdict = "PASS" if ok else "FAIL"
        summary["verdict"] = verdict
        digest = _digest({"stokes_eigenvalue": round(eig.lam, 10), "m": eig.m, "tol": 1e-8})
        _write(cfg, name, {"result": summary, "pencil_digest": digest}, fit.csv_rows())
        _table("l6b", [("lambda", eig.lam), ("m", eig.m), ("beta", fit.beta), ("slope", fit.slope), ("R^2", fit.r_squared),
                       ("rhs variation", fit.rhs_variation), ("verdict", verdict)])
    elif exp == "l6a":
        s = _complex(str(o["s"]))
        fit = S.run_l6a_experiment(cone, float(o["mu"]), s, o["N"], o.get("m"), workers=cfg.workers, seed=cfg.seed)
        bounded = fit.rhs_bounded()
        ok = fit.slope > 0 and fit.r_squared > S.FIT_R2_MIN and all(bounded.values())
        summary = fit.to_dict()
        summary["rhs_bounded"] = bounded
        if abs(float(o["mu"]) + 1.0) < 1e-12 and not o.get("no_layer_ratio"):
            lr = S.layer_scaling_ratio(cone, 2.0 ** max(o["N"]), (1.0, s) if s != 1 else (1.0, 1j))
            lr["within_20_percent"] = lr["relative_deviation"] <= 0.2
            summary["layer_ratio"] = lr
            ok = ok and lr["within_20_percent"]
        verdict = "PASS" if ok else "FAIL"
        summary["verdict"] = verdict
        digest = _digest({"neumann_eigenvalue": round(float(o["mu"]), 10), "m": fit.metadata["m"]})
        _write(cfg, name, {"result": summary, "pencil_digest": digest}, fit.csv_rows())
        _table("l6a", [("mu", float(o["mu"])), ("beta", fit.beta), ("slope", fit.slope), ("R^2", fit.r_squared),
                       ("bounded", str(bounded)), ("verdict", verdict)])
    elif exp == "l12c":
        rep = S.check_l12c_identities(cone, int(o["k"]), _complex(str(o["s"])), float(o["degree"]), o["f_kind"], o["g_kind"],
                                      int(o["points"]), cfg.seed)
        tr = S.check_w1_traces(cone, _complex(str(o["s"])), int(o["points"]), cfg.seed)
        ok = rep.passed() and tr.passed()
        verdict = "PASS" if ok else "FAIL"
        digest = _digest({"neumann_eigenvalue": round(tr.mu2_plus, 10), "m": tr.m})
        _write(cfg, name, {"result": {"identities": rep.to_dict(), "w1_traces": tr.to_dict(), "verdict": verdict},
                           "pencil_digest": digest})
        _table("l12c", [("divergence residual", rep.divergence_residual), ("remainder match", rep.remainder_match),
                        ("homogeneity", rep.homogeneity_residual), ("w1 tangential", tr.tangential_trace),
                        ("w1 normal", tr.normal_trace_error), ("verdict", verdict)])
    elif exp == "l12a":
        lam1 = o.get("lambda1")
        from .stokes import lambda1_plus

        l1 = float(lam1) if lam1 is not None else lambda1_plus(cone, int(o["resolution"]), int(o["m_max"]), cfg.workers)
        beta = float(o["beta"]) if o.get("beta") is not None else l1 + 1.5 + float(o["offset"])
        rep = S.kernel_candidate_l12a(cone, beta, o["depths"], int(o["resolution"]), int(o["m_max"]), lam1=l1)
        expected = "stable" if beta > l1 + 1.5 else "divergent"
        ok = rep.verdict == expected and abs(rep.increment_ratio / rep.predicted_increment_ratio - 1) < 0.01
        verdict = "PASS" if ok else "FAIL"
        d = rep.to_dict()
        d.update(expected=expected, verdict_check=verdict)
        digest = _digest({"stokes_eigenvalue": round(rep.lambda1_minus, 10), "m": rep.m, "tol": 1e-8})
        rows = [["nu_min", "nu_max", "squared_norm"]] + [[w[0], w[1], v] for w, v in zip(rep.windows, rep.squared_norms)]
        _write(cfg, name, {"result": d, "pencil_digest": digest}, rows)
        _table("l12a", [("lambda1-", rep.lambda1_minus), ("beta", beta), ("increment ratio", rep.increment_ratio),
                        ("predicted", rep.predicted_increment_ratio), ("trend", rep.verdict), ("verdict", verdict)])
    elif exp == "scaling":
        rep = S.scaling_identity_check(
            _complex(str(o["s"])), float(o["beta"] if o.get("beta") is not None else 0.0), cone=cone
        )
        verdict = "PASS" if rep.passed() else "FAIL"
        d = rep.to_dict()
        d["verdict"] = verdict
        _write(cfg, name, {"result": d, "pencil_digest": None})
        _table("scaling", [(k, v) for k, v in d.items() if "error" in k] + [("verdict", verdict)])
    else:
        raise ValidationError(f"unknown experiment {exp!r}")
    return EXIT_OK if verdict == "PASS" else EXIT_FAIL


def _quad_spec(o):
    from .norms import QuadratureSpec

    return QuadratureSpec(n_r=int(o["n_r"]), n_theta=int(o["n_theta"]), n_phi=int(o["n_phi"]))


def cmd_norms(cfg: RunConfig) -> int:
    from .cone import CircularCone
    from .fields import builtin_field
    from .norms import CSV_HEADER, e_norm, v_norm, x_norm_upper

    o = cfg.options
    cone = CircularCone(cfg.theta0 if cfg.theta0 is not None else math.pi / 2)
    f = builtin_field(o["field"])
    spec = _quad_spec(o)
    kind, l, beta, win = o["kind"], int(o["l"]), float(o["beta"]), o["window"]
    if kind == "V":
        rep = v_norm(f, cone, beta, l, win, spec, estimate_error=True)
    elif kind == "E":
        rep = e_norm(f, cone, beta, l, win, spec, estimate_error=True)
    else:
        rep = x_norm_upper(f, cone, beta, win, spec)
    d = {
        "field": o["field"], "kind": rep.kind, "beta": beta, "l": rep.l, "window": list(win), "theta0": cone.theta0,
        "value": rep.value, "label": rep.label, "tail_indicator": rep.tail_indicator,
        "error_estimate": rep.error_estimate, "dyad_contributions": list(rep.dyad_contributions),
        "resolution": asdict(spec),
    }
    _write(cfg, "norms", {"result": d, "pencil_digest": None}, [CSV_HEADER, rep.csv_row(o["field"])])
    _table("weighted norm", [("field", o["field"]), ("kind", rep.kind), ("value", rep.value), ("tail", rep.tail_indicator)])
    return EXIT_OK


def cmd_parseval(cfg: RunConfig) -> int:
    from .cone import CircularCone
    from .fields import builtin_field
    from .transform import PROFILES, SeparableTimeField, parseval_check

    o = cfg.options
    cone = CircularCone(cfg.theta0 if cfg.theta0 is not None else math.pi / 2)
    fld = SeparableTimeField(builtin_field(o["field"]), PROFILES[o["profile"]]())
    rep = parseval_check(fld, cone, float(o["beta"]), int(o["l"]), tuple(o["gamma"]), tuple(o["window"]), _quad_spec(o))
    last = rep.rows[-1]
    ok = rep.monotone and last.defect < 1e-6
    verdict = "PASS" if ok else "FAIL"
    rows = [["gamma", "frequency_side", "temporal_side", "defect", "damped_temporal", "damped_defect", "truncation_error", "tau_max"]]
    rows += [r.csv() for r in rep.rows]
    _write(
        cfg,
        "parseval",
        {"result": {"rows": [dict(zip(rows[0], r.csv())) for r in rep.rows], "monotone": rep.monotone,
                    "even_asymmetry": rep.even_asymmetry, "metadata": rep.metadata, "verdict": verdict},
         "pencil_digest": None},
        rows,
    )
    _table("parseval", [(f"gamma={r.gamma:g}", f"defect {r.defect:.3e}, damped {r.damped_defect:.3e}") for r in rep.rows]
           + [("monotone", str(rep.monotone)), ("verdict", verdict)])
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "pencil": cmd_pencil,
    "intervals": cmd_intervals,
    "classify": cmd_classify,
    "shift": cmd_shift,
    "sharpness": cmd_sharpness,
    "norms": cmd_norms,
    "parseval": cmd_parseval,
}


# ----------------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--outdir", default="out")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--config", default=None, help="key=value file; keys mirror flag names")
    common.add_argument("--theta0", type=float, default=None, help="cone half-angle in radians")

    pencil_opts = _Parser(add_help=False)
    pencil_opts.add_argument("--m-max", type=int, default=6)
    pencil_opts.add_argument("--resolution", type=int, default=64)
    pencil_opts.add_argument("--lambda1", type=float, default=None, help="skip the pencil solve: use this lambda1+")
    pencil_opts.add_argument("--mu2", type=float, default=None, help="skip the pencil solve: use this mu2+")

    p = _Parser(prog="conestokes", description="Stokes resolvent on circular cones: pencils, weights, experiments.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pe = sub.add_parser("pencil", parents=[common])
    pe.add_argument("which", choices=["neumann", "stokes"])
    pe.add_argument("--m-max", type=int, default=6)
    pe.add_argument("--window", type=_pair, default=None)
    pe.add_argument("--tol", type=float, default=None)
    pe.add_argument("--resolution", type=int, default=64)

    sub.add_parser("intervals", parents=[common, pencil_opts])

    cl = sub.add_parser("classify", parents=[common, pencil_opts])
    cl.add_argument("--beta", type=float, default=None)
    cl.add_argument("--sweep", type=_triple, default=None, help="a,b,step")

    sh = sub.add_parser("shift", parents=[common, pencil_opts])
    sh.add_argument("--beta", type=float, required=True)
    sh.add_argument("--gamma", type=float, required=True)
    sh.add_argument("--mean-zero", action="store_true")

    sp = sub.add_parser("sharpness", parents=[common, pencil_opts])
    sp.add_argument("experiment", choices=["l6b", "l6a", "l12a", "l12c", "scaling"])
    sp.add_argument("--beta", type=float, default=None)
    sp.add_argument("--lam", type=float, default=1.0)
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--eps", type=_dyadic_exponents, default="2^-4..2^-12")
    sp.add_argument("--control-beta", type=float, default=None)
    sp.add_argument("--s", default=None)
    sp.add_argument("--mu", type=float, default=-1.0)
    sp.add_argument("--N", type=_dyadic_exponents, default="2^3..2^10")
    sp.add_argument("--no-layer-ratio", action="store_true")
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--degree", type=float, default=0.5)
    sp.add_argument("--f-kind", choices=["zero", "constant", "smooth"], default="smooth")
    sp.add_argument("--g-kind", choices=["zero", "constant", "smooth"], default="smooth")
    sp.add_argument("--points", type=int, default=100)
    sp.add_argument("--offset", type=float, default=0.2)
    sp.add_argument("--depths", type=_ints, default="2,4,6,8,10,12")

    no = sub.add_parser("norms", parents=[common])
    no.add_argument("--field", required=True)
    no.add_argument("--kind", choices=["V", "E", "Xupper"], required=True)
    no.add_argument("--beta", type=float, required=True)
    no.add_argument("--l", type=int, choices=[0, 1, 2], default=0)
    no.add_argument("--window", type=_int_pair, default=(0, 1))
    for q, d in (("n-r", 8), ("n-theta", 32), ("n-phi", 32)):
        no.add_argument(f"--{q}", type=int, default=d)

    pa = sub.add_parser("parseval", parents=[common])
    pa.add_argument("--profile", choices=["exp", "texp"], required=True)
    pa.add_argument("--beta", type=float, required=True)
    pa.add_argument("--l", type=int, choices=[0, 1], default=0)
    pa.add_argument("--field", default="bump")
    pa.add_argument("--gamma", type=_floats, default="0.1,0.01,0.001")
    pa.add_argument("--window", type=_int_pair, default=(0, 1))
    for q, d in (("n-r", 8), ("n-theta", 32), ("n-phi", 16)):
        pa.add_argument(f"--{q}", type=int, default=d)
    return p


_PASSTHROUGH = {"command", "outdir", "seed", "workers", "config", "theta0"}
_SWITCHES = {"--mean-zero", "--no-layer-ratio", "-h", "--help"}


def _join_negative_values(argv: Sequence[str]) -> list[str]:
    """Turn ``--window -3,3`` into ``--window=-3,3`` so argparse does not see an option."""
    out, i = [], 0
    argv = list(argv)
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok.startswith("--") and "=" not in tok and tok not in _SWITCHES and nxt is not None and re.match(r"^-[\d.]", nxt):
            out.append(f"{tok}={nxt}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def parse(argv: Sequence[str]) -> RunConfig:
    parser = build_parser()
    argv = _join_negative_values(argv)
    ns = parser.parse_args(argv)
    if ns.config:
        cfg_vals = read_config(ns.config)
        sub = parser._subparsers._group_actions[0].choices[ns.command]  # noqa: SLF001
        known = {a.dest: a for a in sub._actions}  # noqa: SLF001
        bad = sorted(k for k in cfg_vals if k not in known or k == "config")
        if bad:
            raise ValidationError(f"unknown config keys: {', '.join(bad)}")
        given = {tok.split("=", 1)[0] for tok in argv if tok.startswith("--")}
        explicit = {a.dest for a in sub._actions if given & set(a.option_strings)}  # noqa: SLF001
        for k, v in cfg_vals.items():
            if k in explicit:
                continue
            act = known[k]
            if act.nargs == 0:
                val = v.lower() in ("1", "true", "yes", "on")
            else:
                val = act.type(v) if act.type else v
            setattr(ns, k, val)
    opts = {k: v for k, v in vars(ns).items() if k not in _PASSTHROUGH}
    if ns.command == "sharpness" and opts.get("s") is None:
        opts["s"] = "1j" if ns.experiment == "l6a" else ("4" if ns.experiment == "scaling" else "1")
    cfg = RunConfig(ns.command, ns.theta0, ns.outdir, ns.seed, ns.workers, opts)
    cfg.validate()
    return cfg


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse(argv)
        return COMMANDS[cfg.command](cfg)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (ArithmeticError, RuntimeError, np.linalg.LinAlgError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
