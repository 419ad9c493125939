"""Batch experiment runner.

    lab list
    lab validate <config.json>
    lab run <config.json>

A config is a JSON object::

    {
      "experiment": "counterexample",
      "domain": {"kind": "polydisc", "dim": 2, "params": [1, 1]},
      "map": "projection",
      "quadrature": {"method": "stratified", "samples": 200000, "seed": 1, "strata": 40},
      "params": {"degrees": [4, 6, 8], "j_list": [2, 4, 8]},
      "output": "out/counterexample"
    }

``map`` is a preset name or a list of component polynomials in the
``re,im:e1,...,en`` text form (one string per component, lines separated by
newlines).  Reports go to ``<output>.json``; curves go to ``<output>.csv``
and singular profiles to ``<output>_profiles.csv``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bergman import monomial_norm_sq, norm_p
from .geometry import Domain, DomainError
from .maps import (boundary_jacobian_scan, parse_map,
                   range_compactly_contained, HolomorphicMap)
from .operatorlab import (catalog, change_of_variables_check, compactness_diagnostic,
                          conjugation_invariance_check, essential_lower_bound, reverse_carleson_ratio,
                          singular_preimage_crosstab, singular_values, build_matrix)
from .polyalg import multi_indices
from .quadrature import DivergenceError, QuadratureSpec
from .sequences import NormalizationError, TestFamilySpec, blowup_threshold, weak_null_report

log = logging.getLogger("bergmanlab")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass
class ExperimentConfig:
    experiment: str
    domain: Domain
    map: HolomorphicMap | None
    quadrature: QuadratureSpec
    params: dict
    output: str
    raw: dict

    def resolved(self) -> dict:
        return {
            "experiment": self.experiment,
            "domain": self.domain.to_dict(),
            "map": self.raw.get("map"),
            "quadrature": self.quadrature.to_dict(),
            "params": self.params,
            "output": self.output,
        }


EXPERIMENTS = {}


def experiment(name: str, needs_map: bool = False, defaults: dict | None = None, doc: str = ""):
    def register(fn):
        EXPERIMENTS[name] = (fn, needs_map, defaults or {}, doc)
        return fn
    return register


def _line_of(text: str, key: str) -> int | None:
    for i, line in enumerate(text.splitlines(), 1):
        if f'"{key}"' in line:
            return i
    return None


def parse_config(text: str) -> ExperimentConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, exc.lineno) from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object", 1)

    def fail(key, msg):
        raise ConfigError(msg, _line_of(text, key))

    name = raw.get("experiment")
    if name not in EXPERIMENTS:
        fail("experiment", f"unknown experiment {name!r}; known: {', '.join(sorted(EXPERIMENTS))}")
    _, needs_map, defaults, _ = EXPERIMENTS[name]
    unknown = set(raw) - {"experiment", "domain", "map", "quadrature", "params", "output"}
    if unknown:
        fail(sorted(unknown)[0], f"unknown top-level key {sorted(unknown)[0]!r}")
    try:
        domain = Domain.from_dict(raw.get("domain", {"kind": "ball", "dim": 2}))
    except (KeyError, TypeError, ValueError) as exc:
        fail("domain", f"invalid domain: {exc}")
    phi = None
    if needs_map or "map" in raw:
        if "map" not in raw:
            fail("experiment", f"experiment {name!r} needs a map")
        try:
            phi = parse_map(raw["map"], domain.dim)
        except (TypeError, ValueError) as exc:
            fail("map", f"invalid map: {exc}")
        if phi.dim != domain.dim:
            fail("map", "map and domain dimensions differ")
    try:
        quad = QuadratureSpec.from_dict(raw.get("quadrature", {}))
    except (TypeError, ValueError) as exc:
        fail("quadrature", f"invalid quadrature: {exc}")
    params = dict(defaults)
    given = raw.get("params", {})
    if not isinstance(given, dict):
        fail("params", "params must be an object")
    extra = set(given) - set(defaults)
    if extra:
        fail(sorted(extra)[0], f"unknown parameter {sorted(extra)[0]!r} for {name}")
    params.update(given)
    output = raw.get("output", f"out/{name}")
    if not isinstance(output, str) or not output:
        fail("output", "output must be a non-empty path prefix")
    return ExperimentConfig(name, domain, phi, quad, params, output, raw)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_csv_cell(x) for x in row])
    return buf.getvalue()


def _csv_cell(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


# -- experiments -----------------------------------------------------------------

@experiment("norms", defaults={"max_degree": 4}, doc="monomial norms: Monte Carlo vs closed form")
def _norms(cfg: ExperimentConfig):
    rows = []
    for alpha in multi_indices(cfg.domain.dim, int(cfg.params["max_degree"])):
        exact = monomial_norm_sq(alpha, cfg.domain)
        mc = norm_p(lambda z, a=alpha: np.prod(z ** np.array(a), axis=1), cfg.domain, 2, cfg.quadrature)
        est, err = mc.value ** 2, 2 * mc.value * mc.std_error
        rows.append({"alpha": list(alpha), "closed_form": exact, "monte_carlo": est, "std_error": err,
                     "z_score": (est - exact) / err if err > 0 else 0.0})
    ok = all(abs(r["z_score"]) <= 3 for r in rows)
    return {"rows": rows, "all_within_3_sigma": ok}, None


@experiment("carleson", defaults={"delta": 0.2, "max_degree": 6},
            doc="reverse-Carleson ratio ||f||_Omega / ||f||_layer for monomials")
def _carleson(cfg: ExperimentConfig):
    delta = float(cfg.params["delta"])
    rows = []
    for alpha in multi_indices(cfg.domain.dim, int(cfg.params["max_degree"])):
        r = reverse_carleson_ratio(lambda z, a=alpha: np.prod(z ** np.array(a), axis=1),
                                   cfg.domain, delta, cfg.quadrature)
        rows.append({"alpha": list(alpha), "degree": sum(alpha), "ratio": r.value, "std_error": r.std_error})
    curve = [(r["degree"], r["alpha"][0], r["ratio"], r["std_error"]) for r in rows]
    return {"delta": delta, "rows": rows}, (("degree", "alpha1", "ratio", "std_error"), curve)


@experiment("conjugation", needs_map=True,
            defaults={"B": [[1, 0], [0, 2]], "target": {"kind": "ball", "dim": 2}, "degrees": [4, 6, 8],
                      "tau": 0.9},
            doc="change of variables and conjugation invariance under a linear B")
def _conjugation(cfg: ExperimentConfig):
    B = HolomorphicMap.from_matrix(np.array(cfg.params["B"], dtype=complex))
    target = Domain.from_dict(cfg.params["target"])
    tests = {"1": lambda z: np.ones(len(z)), "z1": lambda z: z[:, 0], "z1z2": lambda z: z[:, 0] * z[:, 1]}
    cov = {}
    for name, h in tests.items():
        r = change_of_variables_check(h, B, cfg.domain, target, cfg.quadrature)
        cov[name] = {"lhs": r.lhs, "rhs": r.rhs, "residual": r.residual}
    chk = conjugation_invariance_check(cfg.map, B, cfg.domain, target, cfg.params["degrees"],
                                       float(cfg.params["tau"]))
    return {"change_of_variables": cov, "original": chk.original.to_dict(),
            "conjugated": chk.conjugated.to_dict(), "verdicts_agree": chk.agree,
            "max_profile_gap": chk.max_profile_gap}, None


@experiment("bounded-scan", needs_map=True, defaults={"samples": 10000, "degrees": [2, 4, 6, 8]},
            doc="boundary Jacobian scan and compression-norm trend")
def _bounded_scan(cfg: ExperimentConfig):
    scan = boundary_jacobian_scan(cfg.map, cfg.domain, int(cfg.params["samples"]), cfg.quadrature.seed)
    trend = [(d, float(singular_values(build_matrix(cfg.map, cfg.domain, d))[0])) for d in cfg.params["degrees"]]
    return {"jacobian": scan.to_dict(), "jacobian_nonvanishing": scan.min_abs > 1e-6,
            "compression_norms": trend}, (("degree", "norm"), trend)


@experiment("jac-scan", needs_map=True, defaults={"samples": 1000}, doc="boundary Jacobian scan")
def _jac_scan(cfg: ExperimentConfig):
    scan = boundary_jacobian_scan(cfg.map, cfg.domain, int(cfg.params["samples"]), cfg.quadrature.seed)
    return scan.to_dict(), None


@experiment("compact-range", needs_map=True, defaults={"samples": 10000, "degrees": [4, 6, 8], "tau": 0.9},
            doc="closure of the range inside the domain, with a compactness diagnostic")
def _compact_range(cfg: ExperimentConfig):
    ok, margin = range_compactly_contained(cfg.map, cfg.domain, int(cfg.params["samples"]), cfg.quadrature.seed)
    diag = compactness_diagnostic(cfg.map, cfg.domain, cfg.params["degrees"], float(cfg.params["tau"]))
    return {"compactly_contained": ok, "margin": margin, "diagnostic": diag.to_dict()}, \
        (("degree", "k", "sigma"), list(diag.profile_rows()))


@experiment("singular-preimage", defaults={"degrees": [4, 6, 8], "tau": 0.9, "samples": 20000, "tol": 1e-3},
            doc="compactness verdict against boundary preimage and boundary Jacobian")
def _singular_preimage(cfg: ExperimentConfig):
    maps = catalog(cfg.domain.dim)
    if cfg.map is not None:
        maps = {"config": cfg.map}
    rows = singular_preimage_crosstab(cfg.domain, maps, cfg.params["degrees"], float(cfg.params["tau"]),
                                      int(cfg.params["samples"]), float(cfg.params["tol"]), cfg.quadrature.seed)
    return {"rows": [r.to_dict() for r in rows], "all_consistent": all(r.consistent for r in rows)}, None


@experiment("counterexample", needs_map=True,
            defaults={"degrees": [4, 6, 8], "tau": 0.9, "j_list": [2, 4, 8], "family": "f"},
            doc="singular map whose composition operator is not compact")
def _counterexample(cfg: ExperimentConfig):
    diag = compactness_diagnostic(cfg.map, cfg.domain, cfg.params["degrees"], float(cfg.params["tau"]))
    fam = TestFamilySpec(cfg.params["family"], 0.5, cfg.domain)
    bound = essential_lower_bound(cfg.map, fam, cfg.params["j_list"], cfg.quadrature)
    diag.essential_lower_bound = bound.value
    return {"diagnostic": diag.to_dict(), "essential_lower_bound": bound.value,
            "family_members": bound.to_dict()}, (("degree", "k", "sigma"), list(diag.profile_rows()))


@experiment("threshold", defaults={"beta_grid": [round(0.5 + 0.1 * i, 10) for i in range(12)]},
            doc="norm of (1 - z1)^-beta along a grid, with the blow-up exponent")
def _threshold(cfg: ExperimentConfig):
    res = blowup_threshold(cfg.domain, cfg.params["beta_grid"], cfg.quadrature)
    return {"beta_star": res.beta_star, "consistent": res.consistent, "curve": res.to_dict()}, \
        (("beta", "norm_sq", "std_error", "divergence_flag"), list(res.csv_rows()))


@experiment("weak-null", defaults={"j_list": [2, 4, 8, 16], "eps": 0.2, "family": "f"},
            doc="norms, normalizations and sup over K_eps along the family")
def _weak_null(cfg: ExperimentConfig):
    fam = TestFamilySpec(cfg.params["family"], 0.5, cfg.domain)
    rep = weak_null_report(fam, cfg.params["j_list"], float(cfg.params["eps"]), cfg.quadrature)
    rows = list(zip(rep.js, rep.betas, rep.alphas, rep.norms, rep.sups))
    return rep.to_dict(), (("j", "beta", "alpha", "norm", "sup_k_eps"), rows)


# -- entry points ------------------------------------------------------------------

def run_experiment(cfg: ExperimentConfig) -> dict:
    fn = EXPERIMENTS[cfg.experiment][0]
    report, curve = fn(cfg)
    out = {"config": cfg.resolved(), "report": report}
    prefix = Path(cfg.output)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{prefix}.json").write_text(json.dumps(_jsonable(out), indent=2, sort_keys=True) + "\n")
    if curve is not None:
        header, rows = curve
        name = f"{prefix}_profiles.csv" if header == ("degree", "k", "sigma") else f"{prefix}.csv"
        Path(name).write_text(_csv_text(header, rows))
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="lab", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list experiments")
    for name in ("run", "validate"):
        p = sub.add_parser(name)
        p.add_argument("config", type=Path)
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")

    if args.command == "list":
        for name in sorted(EXPERIMENTS):
            print(f"{name:18s} {EXPERIMENTS[name][3]}")
        return 0
    try:
        cfg = parse_config(args.config.read_text())
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return 2
    if args.command == "validate":
        print(json.dumps(_jsonable(cfg.resolved()), indent=2, sort_keys=True))
        return 0
    try:
        out = run_experiment(cfg)
    except (DivergenceError, NormalizationError, DomainError, ValueError, ArithmeticError) as exc:
        print(f"{cfg.experiment} failed: {exc}", file=sys.stderr)
        return 1
    log.info("wrote %s.json", cfg.output)
    print(json.dumps(_jsonable(out["report"]), sort_keys=True)[:2000])
    return 0


if __name__ == "__main__":
    sys.exit(main())
