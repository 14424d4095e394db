"""Experiment runner.

    ozlab <subcommand> --config <path> [--seed N] [--out DIR]
    ozlab report --run DIR [--out DIR]

Config files are flat ``key = value`` text (``#`` comments) or a flat JSON
object.  Exit codes: 0 success, 2 validation error, 3 runtime failure.

Seeds: one 64-bit master seed; the seed of cell ``k`` (a tuple of ints) is
the first 64-bit word of ``SeedSequence(master, spawn_key=k)``.  Every
per-cell seed is written to the manifest.

A run writes into ``DIR.partial`` and is renamed to ``DIR`` only on success;
on failure the partial directory is removed.  Existing run directories are
never overwritten.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import os
import shutil
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import BACKEND, __version__

MANIFEST = "manifest.txt"
SUMMARY = "summary.json"
SEED_RULE = "cell seed = SeedSequence(master, spawn_key=cell).generate_state(1, uint64)[0]"


class ConfigError(ValueError):
    pass


class ReportError(ValueError):
    pass


# --- config -----------------------------------------------------------------------------

def _floats(s):
    return [float(v) for v in str(s).replace(";", ",").split(",") if v.strip()]


def _ints(s):
    return [int(v) for v in str(s).replace(";", ",").split(",") if v.strip()]


def _vectors(s):
    """'1,0;0,1' -> [(1,0),(0,1)] (also accepts JSON lists); 'axis' passes through."""
    if isinstance(s, list):
        return [tuple(v) for v in s]
    if str(s).strip() == "axis":
        return "axis"
    return [tuple(float(c) for c in part.split(",")) for part in str(s).split(";") if part.strip()]


def _str(s):
    return str(s)


def _bool(s):
    if isinstance(s, bool):
        return s
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _opt_float(s):
    return None if s is None or str(s).strip().lower() in ("", "none", "auto") else float(s)


COMMON = {"seed": (int, 0)}

SCHEMAS = {
    "enumerate": {"d": (int, 2), "L": (_ints, [2]), "q": (float, 2.0), "p": (float, 0.6),
                  "n_events": (int, 50), "n_pairs": (int, 50)},
    "sample": {"d": (int, 3), "L": (_ints, [16]), "q": (float, 1.5), "p": (float, 0.9),
               "bc": (_str, "free"), "burn_in": (int, 100), "n_clusters": (int, 100),
               "min_size": (int, 1), "thinning": (int, 1), "max_sweeps": (int, 100_000)},
    "decompose": {"d": (int, 3), "L": (_ints, [10]), "q": (float, 1.5), "p": (float, 0.2),
                  "bc": (_str, "free"), "burn_in": (int, 30), "n_clusters": (int, 200),
                  "min_size": (int, 2), "thinning": (int, 1), "max_sweeps": (int, 100_000),
                  "eps": (_floats, [0.2, 0.4, 0.6, 0.8]), "t": (_floats, None),
                  "clusters_file": (_str, "")},
    "polymer": {"d": (int, 3), "q": (float, 2.0), "p": (float, 0.99), "max_size": (int, 8),
                "norm": (_str, "isoperimetric"), "c3": (_opt_float, None),
                "n_models": (int, 100)},
    "transfer": {"alphabet": (_str, "d3_7"), "R": (int, 200), "r_min": (float, 50.0),
                 "r_max": (float, 200.0), "keep": (_str, "axis"), "tilt": (_floats, None)},
    "fit": {"d": (int, 2), "q": (float, 1.0), "p": (float, 0.6), "bc": (_str, "free"),
            "margin": (int, 8), "radii": (_ints, [1, 2, 3, 4]), "n_samples": (int, 10_000),
            "thinning": (int, 1), "directions": (_vectors, "axis"), "oz": (_bool, False)},
}


def _key_lines(text: str, is_json: bool) -> dict:
    out = {}
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if is_json:
            if s.startswith('"'):
                out.setdefault(s[1:].split('"', 1)[0], i)
        elif s and not s.startswith("#") and "=" in s:
            out.setdefault(s.split("=", 1)[0].strip(), i)
    return out


def parse_config(path: str) -> tuple[dict, dict]:
    """Raw key -> value map and key -> line number."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"{path}: cannot read config: {e.strerror}") from None
    is_json = path.endswith(".json") or text.lstrip().startswith("{")
    lines = _key_lines(text, is_json)
    if is_json:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}:{e.lineno}: invalid JSON: {e.msg}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}:1: config must be a flat JSON object")
        for k, v in raw.items():
            if isinstance(v, dict):
                raise ConfigError(f"{path}:{lines.get(k, 1)}: nested value for key {k!r}")
        return raw, lines
    raw = {}
    for i, line in enumerate(text.splitlines(), 1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        if "=" not in s:
            raise ConfigError(f"{path}:{i}: expected 'key = value', got {line.strip()!r}")
        k, v = (a.strip() for a in s.split("=", 1))
        if not k:
            raise ConfigError(f"{path}:{i}: empty key")
        if k in raw:
            raise ConfigError(f"{path}:{i}: duplicate key {k!r}")
        raw[k] = v
    return raw, lines


def resolve_config(sub: str, raw: dict, lines: dict, path: str = "<config>") -> dict:
    schema = {**COMMON, **SCHEMAS[sub]}
    cfg = {}
    for k, v in raw.items():
        where = f"{path}:{lines.get(k, 1)}"
        if k not in schema:
            raise ConfigError(f"{where}: unknown key {k!r} for subcommand {sub!r}")
        conv = schema[k][0]
        try:
            cfg[k] = conv(v)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"{where}: bad value for {k!r}: {e}") from None
    for k, (_, default) in schema.items():
        cfg.setdefault(k, default)
    try:
        validate(sub, cfg)
    except ConfigError as e:
        k = getattr(e, "key", None)
        if k is not None:
            raise ConfigError(f"{path}:{lines.get(k, 0) or '-'}: {e}") from None
        raise ConfigError(f"{path}: {e}") from None
    return cfg


def _bad(key, msg):
    e = ConfigError(f"{key}: {msg}")
    e.key = key
    return e


def validate(sub: str, c: dict):
    """Module preconditions, checked before any work starts."""
    if not 0 <= c["seed"] < 2 ** 64:
        raise _bad("seed", "master seed must fit in 64 bits")
    if "p" in c and not 0 < c["p"] < 1:
        raise _bad("p", "p must lie in (0, 1)")
    if "q" in c and not c["q"] >= 1:
        raise _bad("q", "q must be >= 1")
    if "d" in c and not 1 <= c["d"] <= 4:
        raise _bad("d", "d must be in 1..4")
    if "bc" in c and c["bc"] not in ("free", "wired"):
        raise _bad("bc", "bc must be 'free' or 'wired'")
    if "L" in c:
        if len(c["L"]) not in (1, c["d"]) or min(c["L"]) < 1:
            raise _bad("L", "L must be one side or d positive sides")
    for k in ("n_events", "n_pairs", "n_clusters", "thinning", "max_sweeps", "n_samples", "R",
              "max_size"):
        if k in c and c[k] < (0 if k in ("n_events", "n_pairs") else 1):
            raise _bad(k, "must be positive")
    for k in ("burn_in", "min_size", "n_models", "margin"):
        if k in c and c[k] < 0:
            raise _bad(k, "must be >= 0")
    if sub == "enumerate":
        from .lattice import LatticeSpec
        from .rc_measure import MAX_ENUM_EDGES
        m = _spec(c).n_edges
        if m > MAX_ENUM_EDGES:
            raise _bad("L", f"box has {m} edges, enumeration is capped at {MAX_ENUM_EDGES}")
        if m == 0:
            raise _bad("L", "box has no edges")
        del LatticeSpec
    if sub == "decompose":
        if any(not 0 < e < 1 for e in c["eps"]) or not c["eps"]:
            raise _bad("eps", "eps values must lie in (0, 1)")
        if c["t"] is not None and (len(c["t"]) != c["d"] or not any(c["t"])):
            raise _bad("t", "t must be a nonzero d-vector")
        if c["clusters_file"] and not os.path.exists(c["clusters_file"]):
            raise _bad("clusters_file", f"no such file {c['clusters_file']!r}")
    if sub == "polymer":
        if c["norm"] not in ("isoperimetric", "size"):
            raise _bad("norm", "norm must be 'isoperimetric' or 'size'")
        if not 1 <= c["max_size"] <= 8:
            raise _bad("max_size", "plaquette polymers are enumerated up to size 8")
        if c["d"] not in (2, 3):
            raise _bad("d", "plaquette polymers need d in {2, 3}")
        if c["c3"] is not None and c["c3"] <= 0:
            raise _bad("c3", "must be positive")
    if sub == "transfer":
        if c["keep"] not in ("axis", "all"):
            raise _bad("keep", "keep must be 'axis' or 'all'")
        if not 0 < c["r_min"] < c["r_max"] <= c["R"]:
            raise _bad("r_max", "need 0 < r_min < r_max <= R")
        try:
            from .transfer_op import load_alphabet
            al, _ = load_alphabet(c["alphabet"])
        except (OSError, KeyError, ValueError, FileNotFoundError) as e:
            raise _bad("alphabet", f"cannot load alphabet: {e}") from None
        if c["tilt"] is not None and len(c["tilt"]) != al.d:
            raise _bad("tilt", f"tilt needs {al.d} components")
    if sub == "fit":
        if len(c["radii"]) < 4 or min(c["radii"]) < 1:
            raise _bad("radii", "need >= 4 positive radii")
        if c["directions"] != "axis":
            for u in c["directions"]:
                if len(u) != c["d"] or not any(u) or any(float(a) != int(a) for a in u):
                    raise _bad("directions", "directions must be nonzero integer d-vectors")


def _spec(c):
    from .lattice import LatticeSpec
    L = c["L"]
    return LatticeSpec(c["d"], L[0] if len(L) == 1 else tuple(L))


def _bc(name):
    from .rc_measure import FREE, WIRED
    return FREE if name == "free" else WIRED


# --- seeds, files, manifests ----------------------------------------------------------------

def cell_seed(master: int, *cell: int) -> int:
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(c) for c in cell))
    return int(ss.generate_state(1, np.uint64)[0])


def _sha(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _header(module: str, units: str) -> str:
    return f"# ozlab {__version__} {module}; {units}\n"


@dataclass
class Run:
    sub: str
    cfg: dict
    dir: str
    seeds: dict

    def seed(self, *cell) -> int:
        s = cell_seed(self.cfg["seed"], *cell)
        self.seeds["/".join(map(str, cell)) or "-"] = s
        return s

    def path(self, name) -> str:
        return os.path.join(self.dir, name)

    def write_csv(self, name, module, units, columns, rows):
        buf = io.StringIO()
        buf.write(_header(module, units))
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r])
        self.write_text(name, buf.getvalue())

    def write_text(self, name, text):
        with open(self.path(name), "w", newline="") as fh:
            fh.write(text)

    def write_json(self, name, obj):
        obj = {"producer": f"ozlab {__version__} {self.sub}", **obj}
        self.write_text(name, json.dumps(obj, indent=1, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not JSON serializable: {type(o)}")


def _manifest_text(run: Run, status: str, started: float, finished: float | None,
                   checksums: dict) -> str:
    from .sampler import RNG_NAME
    lines = [
        "ozlab-manifest 1",
        f"status: {status}",
        f"subcommand: {run.sub}",
        f"version: {__version__}",
        f"backend: {BACKEND}",
        f"rng: {RNG_NAME}",
        f"master_seed: {run.cfg['seed']}",
        f"seed_rule: {SEED_RULE}",
        f"started: {_dt.datetime.fromtimestamp(started, _dt.timezone.utc).isoformat()}",
    ]
    if finished is not None:
        lines.append(f"wall_clock_s: {finished - started:.3f}")
    lines.append("config: " + json.dumps(run.cfg, sort_keys=True, default=_jsonable))
    for k, v in sorted(run.seeds.items()):
        lines.append(f"cell_seed {k}: {v}")
    for name, h in sorted(checksums.items()):
        lines.append(f"sha256 {name}: {h}")
    return "\n".join(lines) + "\n"


def read_manifest(run_dir: str) -> dict:
    p = os.path.join(run_dir, MANIFEST)
    if not os.path.isdir(run_dir):
        raise ReportError(f"{run_dir}: not a directory")
    if not os.path.exists(p):
        raise ReportError(f"{run_dir}: no {MANIFEST}")
    with open(p) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != "ozlab-manifest 1":
        raise ReportError(f"{p}:1: not an ozlab manifest")
    out = {"checksums": {}, "cell_seeds": {}}
    for i, line in enumerate(lines[1:], 2):
        if ": " not in line:
            raise ReportError(f"{p}:{i}: corrupt manifest line")
        k, v = line.split(": ", 1)
        if k.startswith("sha256 "):
            out["checksums"][k[7:]] = v
        elif k.startswith("cell_seed "):
            out["cell_seeds"][k[10:]] = int(v)
        elif k == "config":
            try:
                out["config"] = json.loads(v)
            except json.JSONDecodeError:
                raise ReportError(f"{p}:{i}: corrupt config snapshot") from None
        else:
            out[k] = v
    for k in ("status", "subcommand", "config"):
        if k not in out:
            raise ReportError(f"{p}: manifest lacks {k!r}")
    return out


# --- subcommands -------------------------------------------------------------------------------

def run_enumerate(run: Run):
    from .rc_measure import (FREE, WIRED, RCParams, check_order_inequalities, edges_open,
                             exact_probability, random_increasing_event)
    from .lattice import LatticeSpec
    c = run.cfg
    spec = _spec(c)
    pp = RCParams(c["q"], c["p"])
    rng = np.random.default_rng(run.seed(0))
    m = spec.n_edges
    chain_rows, fkg_rows = [], []
    nchain = nfkg = 0
    for i in range(c["n_events"]):
        ev = random_increasing_event(m, rng)
        rep = check_order_inequalities(spec, pp, event=ev)
        nchain += not rep.chain_ok
        chain_rows.append([i, rep.lower, rep.free, rep.wired, rep.upper, int(rep.chain_ok)])
    for i in range(c["n_pairs"]):
        f, g = random_increasing_event(m, rng), random_increasing_event(m, rng)
        rep = check_order_inequalities(spec, pp, event=f, pairs=[(f, g)])
        for bc, pfg, pf, pg, ok in rep.fkg:
            nfkg += not ok
            fkg_rows.append([i, bc, pfg, pf, pg, int(ok)])
    edge = LatticeSpec(1, 2)
    single = exact_probability(edges_open([0], 1), edge, pp, FREE)
    formula = c["p"] / (c["p"] + c["q"] * (1 - c["p"]))
    del WIRED
    run.write_csv("chain.csv", "rc_measure", "probabilities (dimensionless)",
                  ["event", "bernoulli_p_q", "free", "wired", "bernoulli_p", "ok"], chain_rows)
    run.write_csv("fkg.csv", "rc_measure", "probabilities (dimensionless)",
                  ["pair", "bc", "p_fg", "p_f", "p_g", "ok"], fkg_rows)
    run.write_json(SUMMARY, {"edges": m, "chain_violations": nchain, "fkg_violations": nfkg,
                             "single_edge": single, "single_edge_formula": formula,
                             "single_edge_error": abs(single - formula)})
    return nchain == 0 and nfkg == 0


def _harvest(run: Run, c):
    from .cluster_geometry import Cluster
    from .rc_measure import RCParams
    from .sampler import harvest_finite_clusters
    if c.get("clusters_file"):
        out = []
        with open(c["clusters_file"]) as fh:
            for line in fh:
                r = json.loads(line)
                if "vertices" in r:
                    out.append((r.get("sweep", -1), Cluster.from_json(line)))
        return out, None
    spec = _spec(c)
    it = harvest_finite_clusters(spec, RCParams(c["q"], c["p"]), c["n_clusters"], _bc(c["bc"]),
                                 seed=run.seed(0), min_size=c["min_size"], burn_in=c["burn_in"],
                                 thinning=c["thinning"], max_sweeps=c["max_sweeps"])
    got = list(it)
    return got, spec


def run_sample(run: Run):
    got, spec = _harvest(run, run.cfg)
    lines = [json.dumps({"producer": f"ozlab {__version__} sampler", "units": "lattice",
                         "box": list(spec.shape)})]
    rows = []
    for i, (sw, C) in enumerate(got):
        r = json.loads(C.to_json())
        lines.append(json.dumps({"id": i, "sweep": int(sw), **r}, separators=(",", ":")))
        rows.append([i, int(sw), len(C), len(C.edges)])
    run.write_text("clusters.jsonl", "\n".join(lines) + "\n")
    run.write_csv("clusters.csv", "sampler", "sizes in vertices / edges",
                  ["id", "sweep", "size", "n_edges"], rows)
    sizes = [r[2] for r in rows]
    run.write_json(SUMMARY, {"clusters": len(rows), "requested": run.cfg["n_clusters"],
                             "mean_size": float(np.mean(sizes)) if sizes else 0.0,
                             "max_size": max(sizes) if sizes else 0})
    return True


def run_decompose(run: Run):
    from .cluster_geometry import check_decompositions
    c = run.cfg
    got, _ = _harvest(run, c)
    t = c["t"] if c["t"] is not None else [1.0] + [0.0] * (c["d"] - 1)
    rows, bad = [], 0
    for i, (sw, C) in enumerate(got):
        chk = check_decompositions(C, t, c["eps"])
        ok = chk.reconstructs and chk.nested and chk.cone_in_cone
        bad += not ok
        rows.append([i, int(sw), chk.size, " ".join(map(str, chk.n_pieces)), int(chk.reconstructs),
                     int(chk.nested), int(chk.cone_in_cone), chk.dropped])
    run.write_csv("decompose.csv", "cluster_geometry", "sizes in vertices, pieces counted",
                  ["id", "sweep", "size", "interior_pieces_per_eps", "reconstructs", "nested",
                   "in_cone", "dropped_bonds"], rows)
    run.write_json(SUMMARY, {"clusters": len(rows), "failures": bad,
                             "eps": c["eps"], "t": t})
    return bad == 0


def run_polymer(run: Run):
    from .polymer import (cluster_logZ, lattice_kp_check, p0_threshold, partition_direct,
                          polymer_counts, random_model)
    from .rc_measure import RCParams
    c = run.cfg
    rep = lattice_kp_check(RCParams(c["q"], c["p"]), c["d"], c["max_size"], c["c3"], c["norm"])
    counts = polymer_counts(c["d"], c["max_size"])
    run.write_csv("kp.csv", "polymer", "KP sum per unit polymer size (dimensionless)",
                  ["alpha", "kp_sum", "margin"],
                  [[float(a), float(s), float(a - s)] for a, s in zip(rep.alphas, rep.sums)])
    run.write_csv("counts.csv", "polymer", "number of plaquette polymers through a plaquette",
                  ["size", "count"], [[k, int(n)] for k, n in enumerate(counts) if k >= 1])
    rng = np.random.default_rng(run.seed(1))
    worst = 0.0
    for _ in range(c["n_models"]):
        m = random_model(rng)
        cw = cluster_logZ(m)
        worst = max(worst, abs(np.exp(cw.total) / partition_direct(m) - 1))
    p0 = p0_threshold(c["q"], rep.c3, rep.c8) if rep.c8 > 0 else None
    run.write_json(SUMMARY, {"kp_passed": rep.passed, "kp_margin": rep.margin, "alpha": rep.alpha,
                             "c3": rep.c3, "c8": rep.c8, "p0_estimate": p0, "norm": rep.norm,
                             "inversion_models": c["n_models"],
                             "inversion_max_rel_error": worst})
    return True


def run_transfer(run: Run):
    from .transfer_op import (leading_eig, load_alphabet, prefactor_fit, renewal_mass,
                              solve_tilt)
    c = run.cfg
    al, pot = load_alphabet(c["alphabet"])
    tb = renewal_mass(al, pot, c["tilt"], c["R"], keep=c["keep"])
    run.write_text("mass.csv", tb.to_csv())
    fit = prefactor_fit(tb, r_range=(c["r_min"], c["r_max"]))
    d = al.d
    crit = solve_tilt(al, pot) if c["tilt"] is None else None
    run.write_json("fit.json", {"tau": fit.tau, "tau_se": fit.tau_se, "alpha": fit.alpha,
                                "alpha_se": fit.alpha_se, "amplitude": fit.amplitude,
                                "expected_alpha": (d - 1) / 2, "r_range": [c["r_min"], c["r_max"]],
                                "radii": len(fit.radii)})
    run.write_json(SUMMARY, {"alpha": fit.alpha, "alpha_se": fit.alpha_se, "tau": fit.tau,
                             "expected_alpha": (d - 1) / 2,
                             "lambda": leading_eig(al, pot).lam, "divergent": tb.divergent,
                             "critical_tilt": None if crit is None else crit.tolist()})
    return True


def run_fit(run: Run):
    from .estimator import ConnectivityTable, default_box, finite_two_point_mc, tau_fit
    from .rc_measure import RCParams
    c = run.cfg
    d = c["d"]
    if c["directions"] == "axis":
        dirs = [tuple(s * (1 if j == k else 0) for j in range(d)) for k in range(d) for s in (1, -1)]
    else:
        dirs = [tuple(int(a) for a in u) for u in c["directions"]]
    pp = RCParams(c["q"], c["p"])
    table = ConnectivityTable()
    taus, notes = [], {}
    for i, u in enumerate(dirs):
        g = []
        for j, r in enumerate(c["radii"]):
            x = tuple(r * a for a in u)
            spec = default_box(d, x, c["margin"])
            row = finite_two_point_mc(x, spec, pp, _bc(c["bc"]), c["n_samples"], run.seed(i, j),
                                      c["thinning"])
            table.add(row)
            g.append(row.estimate)
        radii = np.array(c["radii"], float) * float(np.linalg.norm(u))
        try:
            import warnings
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                f = tau_fit(u, radii, g, c["oz"], d)
            taus.append([" ".join(map(str, u)), f.tau, f.err, len(f.radii)])
        except ValueError as e:
            notes[" ".join(map(str, u))] = str(e)
            taus.append([" ".join(map(str, u)), float("nan"), float("nan"), 0])
    run.write_text("connectivity.csv", table.to_csv())
    run.write_csv("tau.csv", "estimator", "tau in inverse lattice units",
                  ["direction", "tau", "err", "radii_used"], taus)
    run.write_json(SUMMARY, {"tau": {t[0]: t[1] if np.isfinite(t[1]) else None for t in taus},
                             "tau_err": {t[0]: t[2] if np.isfinite(t[2]) else None for t in taus},
                             "fit_failures": notes})
    return True


RUNNERS = {"enumerate": run_enumerate, "sample": run_sample, "decompose": run_decompose,
           "polymer": run_polymer, "transfer": run_transfer, "fit": run_fit}


def run_experiment(sub: str, config_path: str, seed: int | None = None,
                   out: str | None = None) -> str:
    """Validate, run, and publish a run directory; returns its path."""
    if sub not in RUNNERS:
        raise ConfigError(f"unknown subcommand {sub!r}")
    raw, lines = parse_config(config_path)
    if seed is not None:
        raw["seed"] = seed
        lines.setdefault("seed", 0)
    cfg = resolve_config(sub, raw, lines, config_path)
    out = out or os.path.join("runs", f"{sub}-{cfg['seed']}")
    if os.path.exists(out):
        raise ConfigError(f"output directory {out!r} exists; runs never overwrite")
    tmp = out.rstrip("/") + ".partial"
    if os.path.exists(tmp):
        shutil.rmtree(tmp)
    os.makedirs(tmp)
    run = Run(sub, cfg, tmp, {})
    started = time.time()
    try:
        run.write_text(MANIFEST, _manifest_text(run, "running", started, None, {}))
        ok = RUNNERS[sub](run)
        files = sorted(f for f in os.listdir(tmp) if f != MANIFEST)
        sums = {f: _sha(os.path.join(tmp, f)) for f in files}
        status = "complete" if ok else "complete-with-violations"
        run.write_text(MANIFEST, _manifest_text(run, status, started, time.time(), sums))
        os.replace(tmp, out)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return out


# --- reports -------------------------------------------------------------------------------------

def emit_report(run_dir: str) -> tuple[str, str]:
    """(plain-text summary, CSV index of data files)."""
    man = read_manifest(run_dir)
    sp = os.path.join(run_dir, SUMMARY)
    try:
        with open(sp) as fh:
            summ = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ReportError(f"{sp}: unreadable summary ({e})") from None
    sub = man["subcommand"]
    out = [f"ozlab run report: {os.path.basename(os.path.normpath(run_dir))}",
           f"subcommand {sub}, status {man['status']}, version {man.get('version', '?')}, "
           f"backend {man.get('backend', '?')}",
           f"master seed {man.get('master_seed', '?')}; wall clock {man.get('wall_clock_s', '?')} s",
           "", "parameters:"]
    for k, v in sorted(man["config"].items()):
        out.append(f"  {k} = {v}")
    out += ["", "headline:"]
    if sub == "fit":
        for u, t in summ["tau"].items():
            e = summ["tau_err"].get(u)
            why = summ.get("fit_failures", {}).get(u)
            out.append(f"  tau({u}) = {t if t is None else f'{t:.6g}'}"
                       + ("" if e is None else f" +- {e:.2g}") + (f"  [{why}]" if why else ""))
    elif sub == "polymer":
        out.append(f"  KP {'passed' if summ['kp_passed'] else 'failed'}; worst KP margin "
                   f"{summ['kp_margin']:.6g} at alpha {summ['alpha']:.4g}")
        p0 = summ.get("p0_estimate")
        out.append(f"  c3 = {summ['c3']:.6g}; p0 estimate = "
                   + ("n/a" if p0 is None else f"{p0:.6g}"))
        out.append(f"  cluster-expansion inversion: max rel. error "
                   f"{summ['inversion_max_rel_error']:.3g} over {summ['inversion_models']} models")
    elif sub == "transfer":
        out.append(f"  alpha = {summ['alpha']:.4f} +- {summ['alpha_se']:.2g} "
                   f"(expected {summ['expected_alpha']}); tau = {summ['tau']:.6g}")
    elif sub == "enumerate":
        out.append(f"  domination chain violations {summ['chain_violations']}, "
                   f"FKG violations {summ['fkg_violations']}, single-edge error "
                   f"{summ['single_edge_error']:.3g}")
    elif sub == "decompose":
        out.append(f"  {summ['clusters']} clusters, {summ['failures']} failures")
    elif sub == "sample":
        out.append(f"  {summ['clusters']} clusters (mean size {summ['mean_size']:.4g}, "
                   f"max {summ['max_size']})")
    out += ["", "data files:"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["file", "bytes", "sha256", "checksum_ok"])
    for name, h in sorted(man["checksums"].items()):
        p = os.path.join(run_dir, name)
        ok = os.path.exists(p) and _sha(p) == h
        size = os.path.getsize(p) if os.path.exists(p) else 0
        out.append(f"  {name} ({size} bytes){'' if ok else '  CHECKSUM MISMATCH'}")
        w.writerow([name, size, h, int(ok)])
    return "\n".join(out) + "\n", buf.getvalue()


# --- entry point ------------------------------------------------------------------------------

def _parser():
    ap = argparse.ArgumentParser(prog="ozlab", description=__doc__.split("\n\n")[0])
    sp = ap.add_subparsers(dest="sub", required=True)
    for name in RUNNERS:
        p = sp.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
    p = sp.add_parser("report")
    p.add_argument("--run", required=True)
    p.add_argument("--out")
    return ap


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    try:
        if args.sub == "report":
            text, index = emit_report(args.run)
            if args.out:
                if os.path.exists(args.out):
                    raise ConfigError(f"output directory {args.out!r} exists")
                os.makedirs(args.out)
                with open(os.path.join(args.out, "report.txt"), "w") as fh:
                    fh.write(text)
                with open(os.path.join(args.out, "index.csv"), "w") as fh:
                    fh.write(index)
            sys.stdout.write(text)
            return 0
        out = run_experiment(args.sub, args.config, args.seed, args.out)
        print(out)
        return 0
    except (ConfigError, ReportError) as e:
        print(f"ozlab: error: {e}", file=sys.stderr)
        return 2
    except Exception as e:      # noqa: BLE001 - runtime failures map to exit 3
        print(f"ozlab: runtime failure: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
