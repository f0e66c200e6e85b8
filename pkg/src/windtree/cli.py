"""Command-line front end: one self-describing JSON config per run.

Config grammar (all rationals as "p/q" strings; quadratic numbers as
{"p": "p/q", "q": "p/q", "D": int} meaning p + q*sqrt(D)):

    {
      "kind": "census | admissible | unfold | spectrum | diffusion |
               cylinder-cert | free-pair | essential-scan | winding |
               verdict",
      "seed": 7,                      # mandatory for stochastic kinds
      "precision": "exact",           # informational; default "exact"
      "table": {
        "lattice": [["1","0"], ["0","1"]],   # rows are basis vectors
        "lambda": "1/2",                     # Lambda_lambda shortcut
        "a": "1/2", "b": "1/2",              # rectangle obstacle dims
        "polygon": {"rectangle": ["1/2","1/2"]}
                  | {"sucker": {"kind": "a", "width": ..., "height": ...,
                                "slit": ..., "offset": ...}}
                  | {"vertices": [["x","y"], ...]}
      },
      "budgets": {...},               # kind-specific, all positive
      "classes": ["gamma_h", ...],    # winding: named classes or "K1"
      "scan": {...}                   # essential-scan system description
    }

Every summary embeds the tool version, a SHA-256 hash of the canonical
config text, the seed, and the precision mode; exact-mode reruns of the
same config are bit-identical.  Exit codes: 0 success, 1 verification or
search failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .billiard import diffusion_ensemble, diffusion_exponent, ehrenfest_table
from .certificates import (
    ehrenfest_cylinder_search,
    free_pair_search,
    verify_certificate,
)
from .diagnostics import bounded_winding_check, essential_value_scan, rotation_map
from .errors import (
    CertificateError,
    IllConditioned,
    InsufficientData,
    NonConvergence,
    PreconditionFail,
    SearchFailed,
    WindtreeError,
)
from .geometry import (
    LatticeBasis,
    RectilinearPolygon,
    corner_census,
    is_admissible,
    make_rectangle,
    make_suckered_rectangle,
)
from .homology import (
    HomologyModel,
    attach_named_classes,
    involution_action,
    splitting,
)
from .lyapunov import lyapunov_spectrum, nonergodicity_verdict, sample_direction
from .qfield import QNum
from .surface import genus_and_stratum, unfold

KINDS = (
    "census", "admissible", "unfold", "spectrum", "diffusion",
    "cylinder-cert", "free-pair", "essential-scan", "winding", "verdict",
)
STOCHASTIC = ("spectrum", "diffusion", "winding")

# input-side failures (exit 2); everything else raised by the library is a
# verification/search failure (exit 1)
_INPUT_ERRORS = (
    "MalformedPolygon", "InvalidDims", "NotAdmissible", "NotCommensurable",
    "NotSymmetric", "DimensionMismatch", "UnsupportedLattice",
    "EulerViolation", "RationalSlope", "InvalidSignature",
)


class ConfigError(ValueError):
    pass


def _num(x):
    """Parse "p/q", an int, or {"p","q","D"} into an exact number."""
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, dict):
        return QNum(Fraction(x["p"]), Fraction(x.get("q", 0)), int(x.get("D", 0)))
    raise ConfigError(f"not an exact number: {x!r}")


def _lattice(spec) -> LatticeBasis:
    if "lattice" in spec:
        (a, b), (c, d) = spec["lattice"]
        return LatticeBasis((_num(a), _num(b)), (_num(c), _num(d)))
    if "lambda" in spec:
        return LatticeBasis((Fraction(1), Fraction(0)),
                            (_num(spec["lambda"]), Fraction(1)))
    raise ConfigError("table needs a lattice or a lambda")


def _polygon(spec) -> RectilinearPolygon:
    p = spec.get("polygon")
    if p is None:
        if "a" in spec and "b" in spec:
            return make_rectangle(_num(spec["a"]), _num(spec["b"]))
        raise ConfigError("table needs a polygon or (a, b)")
    if "rectangle" in p:
        w, h = p["rectangle"]
        return make_rectangle(_num(w), _num(h))
    if "sucker" in p:
        s = p["sucker"]
        return make_suckered_rectangle(
            s["kind"], _num(s["width"]), _num(s["height"]), _num(s["slit"]),
            offset=_num(s["offset"]) if "offset" in s else None,
        )
    if "vertices" in p:
        return RectilinearPolygon([(_num(x), _num(y)) for x, y in p["vertices"]])
    raise ConfigError("unknown polygon description")


def _budget(budgets, key, default=None, kind=float):
    if key not in budgets:
        if default is None:
            raise ConfigError(f"missing budget {key!r}")
        return default
    v = kind(budgets[key])
    if v <= 0:
        raise ConfigError(f"budget {key!r} must be positive")
    return v


def _model_and_splitting(table):
    surf = unfold(_lattice(table), _polygon(table))
    model = HomologyModel(surf.origami, validate=False)
    attach_named_classes(model, surf)
    acts = {w: involution_action(surf, model, w) for w in ("tau", "zeta0", "zeta1")}
    spl = splitting(model, acts, corner_census(surf.polygon))
    return surf, model, acts, spl


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _do_census(cfg, out):
    c = corner_census(_polygon(cfg["table"]))
    euler = -2 * c.m1 + 2 * c.m3 + 4 * c.m4
    return {"m1": c.m1, "m3": c.m3, "m4": c.m4, "euler": euler,
            "euler_ok": euler == 4}


def _do_admissible(cfg, out):
    t = cfg["table"]
    return {"admissible": is_admissible(_lattice(t), _polygon(t))}


def _do_unfold(cfg, out):
    t = cfg["table"]
    surf = unfold(_lattice(t), _polygon(t))
    g, stratum = genus_and_stratum(surf)
    c = corner_census(surf.polygon)
    return {"n_squares": surf.origami.n_squares, "genus": g,
            "stratum": list(stratum),
            "census": {"m1": c.m1, "m3": c.m3, "m4": c.m4}}


def _do_spectrum(cfg, out):
    b = cfg.get("budgets", {})
    _, model, acts, spl = _model_and_splitting(cfg["table"])
    k = int(_budget(b, "classes", 2, int))
    classes = [list(g) for g in spl.K1[:k]]
    est = lyapunov_spectrum(
        model, classes,
        n_steps=int(_budget(b, "n_steps", 40000, int)),
        n_directions=int(_budget(b, "n_directions", 6, int)),
        seed=cfg["seed"], action=acts["tau"],
    )
    return {"exponents": est.exponents, "stderr": est.stderr,
            "taut_norm": est.taut_norm, "grouped_steps": est.grouped_steps,
            "verdict": nonergodicity_verdict(estimate=est).fired}


def _do_diffusion(cfg, out):
    t = cfg["table"]
    b = cfg.get("budgets", {})
    if "a" not in t or "b" not in t:
        raise ConfigError("diffusion needs (a, b) obstacle dimensions")
    table = ehrenfest_table(_lattice(t), _num(t["a"]), _num(t["b"]))
    series = diffusion_ensemble(
        table,
        n_orbits=int(_budget(b, "n_orbits", 30, int)),
        T=_budget(b, "T", 1e5),
        dt=_budget(b, "dt", 100.0),
        seed=cfg["seed"],
    )
    expo, err = diffusion_exponent(series)
    s0 = series[0]
    rm = s0.running_max()
    with open(Path(out) / "diffusion_series.csv", "w") as f:
        f.write("t,max_disp\n")
        for ti, vi in zip(s0.times, rm):
            f.write(f"{ti!r},{vi!r}\n")
    return {"exponent": expo, "stderr": err, "n_orbits": len(series),
            "resampled": sum(s.resampled for s in series)}


def _do_cylinder_cert(cfg, out):
    t = cfg["table"]
    cert = ehrenfest_cylinder_search(_num(t.get("lambda", 0)),
                                     _num(t["a"]), _num(t["b"]))
    verify_certificate(cert)
    (Path(out) / "certificate.json").write_text(cert.to_json())
    return {"certificate": json.loads(cert.to_json()), "verified": True}


def _do_free_pair(cfg, out):
    t = cfg["table"]
    fp = free_pair_search(_lattice(t), _polygon(t))
    (Path(out) / "free_pair.json").write_text(fp.to_json())
    return json.loads(fp.to_json())


def _do_essential_scan(cfg, out):
    scan_cfg = cfg.get("scan", {})
    b = cfg.get("budgets", {})
    if scan_cfg.get("system") != "rotation":
        raise ConfigError("essential-scan currently supports the rotation "
                          "system; IET observables are library-level")
    alpha = float(scan_cfg["alpha"])
    if scan_cfg.get("psi", "constant") != "constant":
        raise ConfigError("unknown psi description")
    scan = essential_value_scan(
        rotation_map(alpha), lambda x: (1,),
        N=int(_budget(b, "N", 200, int)),
        depth=int(_budget(b, "depth", 3, int)),
        window=int(_budget(b, "window", 8, int)),
        grid=int(_budget(b, "grid", 8, int)),
        description=f"rotation alpha={alpha!r}, psi=1",
    )
    return json.loads(scan.to_json())


def _do_winding(cfg, out):
    b = cfg.get("budgets", {})
    _, model, acts, spl = _model_and_splitting(cfg["table"])
    names = cfg.get("classes", ["gamma_h"])
    if names == "K1":
        gammas = [list(g) for g in spl.K1]
    else:
        gammas = [list(model.named[n]) for n in names]
    u = sample_direction(random.Random(cfg["seed"])).u
    rep = bounded_winding_check(
        model, u, gammas,
        n_steps=int(_budget(b, "n_steps", 20000, int)),
        n_orbits=int(_budget(b, "n_orbits", 4, int)),
        seed=cfg["seed"], keep_series=True,
    )
    with open(Path(out) / "winding_series.csv", "w") as f:
        f.write("n," + ",".join(f"psi_{i}" for i in range(len(gammas))) + "\n")
        for row in rep.csv_rows(orbit=0):
            f.write(",".join(str(v) for v in row) + "\n")
    return json.loads(rep.to_json())


def _do_verdict(cfg, out):
    t = cfg["table"]
    census = corner_census(_polygon(t))
    v = nonergodicity_verdict(
        g=cfg.get("g"), p=cfg.get("p"), d=cfg.get("d"), census=census,
    )
    return {"fired": v.fired, "detail": v.detail}


_DISPATCH = {
    "census": _do_census,
    "admissible": _do_admissible,
    "unfold": _do_unfold,
    "spectrum": _do_spectrum,
    "diffusion": _do_diffusion,
    "cylinder-cert": _do_cylinder_cert,
    "free-pair": _do_free_pair,
    "essential-scan": _do_essential_scan,
    "winding": _do_winding,
    "verdict": _do_verdict,
}


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def _validate(cfg):
    kind = cfg.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"unknown kind {kind!r}; expected one of {KINDS}")
    if kind in STOCHASTIC and not isinstance(cfg.get("seed"), int):
        raise ConfigError(f"kind {kind!r} requires an integer seed")
    for key, v in cfg.get("budgets", {}).items():
        if not isinstance(v, (int, float)) or v <= 0:
            raise ConfigError(f"budget {key!r} must be a positive number")


def run(cfg: dict, out: str = ".") -> dict:
    """Execute one experiment config; returns the summary dictionary."""
    _validate(cfg)
    kind = cfg["kind"]
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    Path(out).mkdir(parents=True, exist_ok=True)
    result = _DISPATCH[kind](cfg, out)
    summary = {
        "version": __version__,
        "config_sha256": hashlib.sha256(canonical.encode()).hexdigest(),
        "kind": kind,
        "seed": cfg.get("seed"),
        "precision": cfg.get("precision", "exact"),
        "result": result,
    }
    name = kind.replace("-", "_") + "_summary.json"
    (Path(out) / name).write_text(json.dumps(summary, indent=1, sort_keys=True))
    return summary


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="windtree", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run",) + KINDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="path to the JSON experiment config")
        p.add_argument("--out", default=".", help="output directory")
    args = parser.parse_args(argv)
    try:
        text = Path(args.config).read_text()
    except OSError as e:
        print(f"cannot read config: {e}", file=sys.stderr)
        return 2
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        print(f"malformed JSON at line {e.lineno} column {e.colno}: {e.msg}",
              file=sys.stderr)
        return 2
    if args.command != "run":
        if cfg.get("kind", args.command) != args.command:
            print(f"config kind {cfg.get('kind')!r} does not match "
                  f"subcommand {args.command!r}", file=sys.stderr)
            return 2
        cfg["kind"] = args.command
    try:
        summary = run(cfg, out=args.out)
    except (ConfigError, KeyError, TypeError) as e:
        print(f"invalid config: {e}", file=sys.stderr)
        return 2
    except WindtreeError as e:
        if type(e).__name__ in _INPUT_ERRORS:
            print(f"invalid input: {e}", file=sys.stderr)
            return 2
        print(f"verification failure: {e}", file=sys.stderr)
        return 1
    print(json.dumps(summary, indent=1, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
