"""Command-line front end: ``ductmodes <command> [options]``.

Every run is described by a :class:`RunConfig`.  Results are written as
JSON (an envelope with ``config``, ``result`` and ``diagnostics``) or CSV
(one header row naming the columns).  Complex numbers appear as
``{"re": x, "im": y}`` in JSON and as ``<name>_re, <name>_im`` column pairs in
CSV.  Output is deterministic: a JSON file passed back through ``--config``
reproduces itself byte for byte.

Exit status: 0 success, 2 invalid configuration, 3 numerical failure,
4 I/O failure.
"""

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .eigensolver import BoundarySpec, find_modes
from .ep_locator import encircle_ep, enumerate_eps
from .errors import ConfigError, DuctModesError, OutOfDiskError, RangeExceededError
from .junction import (
    continuity_residuals,
    incident_flux,
    reflected_flux,
    rigid_flux,
    solve_junction,
)
from .nonortho import kp, sij_matrix
from .power import modal_decay_rates, power_profile
from .sweeps import Quantity, sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

COMMANDS = ("modes", "ep", "encircle", "nonortho", "junction", "power", "sweep")

DEFAULT_LOOP = [[0.095, 0.042655], [0.105, 0.042655], [0.105, 0.042652], [0.095, 0.042652], [0.095, 0.042655]]


@dataclass
class RunConfig:
    """Validated description of one run.

    ``impedance_re``/``impedance_im``, when given, override the admittance
    (beta0 = 1/Z; Z = 0 selects the pressure-release wall).
    """

    command: str
    K: float = 30.0
    m: int = 0
    beta_re: float = 0.0
    beta_im: float = 0.0
    impedance_re: float = None
    impedance_im: float = None
    n_modes: int = 50
    format: str = "json"
    output_path: str = None
    threshold: float = 3.0
    kp_cap: float = 1.0e12
    count: int = 1
    ep_index: int = 0
    loop: list = field(default_factory=lambda: [list(p) for p in DEFAULT_LOOP])
    loop_nodes: int = 64
    turns: int = 1
    zmax: float = 10.0
    nz: int = 101
    re_min: float = 0.09
    re_max: float = 0.11
    im_min: float = 0.035
    im_max: float = 0.05
    n_re: int = 41
    n_im: int = 41
    quantity: str = "Kp"

    def spec(self):
        if self.impedance_re is not None or self.impedance_im is not None:
            Z = complex(self.impedance_re or 0.0, self.impedance_im or 0.0)
            return BoundarySpec.from_impedance(self.K, self.m, Z)
        return BoundarySpec(self.K, self.m, complex(self.beta_re, self.beta_im))

    def echo(self):
        """Config as emitted in output files (the destination path is not echoed)."""
        d = dataclasses.asdict(self)
        d.pop("output_path")
        return d


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_INT_FIELDS = {"m", "n_modes", "count", "ep_index", "loop_nodes", "turns", "nz", "n_re", "n_im"}
_FLOAT_FIELDS = {
    "K", "beta_re", "beta_im", "impedance_re", "impedance_im", "threshold", "kp_cap",
    "zmax", "re_min", "re_max", "im_min", "im_max",
}


def validate(raw):
    """Build a :class:`RunConfig` from a mapping, rejecting unknown keys and bad values."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = sorted(set(raw) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    if "command" not in raw:
        raise ConfigError("missing 'command'")
    vals = {}
    for key, value in raw.items():
        if value is None:
            vals[key] = None
            continue
        if key in _INT_FIELDS:
            if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
                raise ConfigError(f"{key} must be an integer")
            vals[key] = int(value)
        elif key in _FLOAT_FIELDS:
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ConfigError(f"{key} must be a finite number")
            vals[key] = float(value)
        else:
            vals[key] = value
    cfg = RunConfig(**vals)
    if cfg.command not in COMMANDS:
        raise ConfigError(f"command must be one of {', '.join(COMMANDS)}")
    if cfg.format not in ("json", "csv"):
        raise ConfigError("format must be 'json' or 'csv'")
    if not cfg.K > 0:
        raise ConfigError("K must be positive")
    if cfg.m < 0:
        raise ConfigError("m must be >= 0")
    if cfg.n_modes < 1:
        raise ConfigError("n_modes must be >= 1")
    if not 1 <= cfg.count <= 20:
        raise ConfigError("count must lie in 1..20")
    if cfg.nz < 1 or cfg.zmax < 0:
        raise ConfigError("z grid needs nz >= 1 and zmax >= 0")
    if cfg.turns < 1:
        raise ConfigError("turns must be >= 1")
    if cfg.quantity not in [q.value for q in Quantity]:
        raise ConfigError(f"quantity must be one of {', '.join(q.value for q in Quantity)}")
    if not (isinstance(cfg.loop, list) and all(isinstance(p, (list, tuple)) and len(p) == 2 for p in cfg.loop)):
        raise ConfigError("loop must be a list of [re, im] pairs")
    cfg.loop = [[float(a), float(b)] for a, b in cfg.loop]
    for n in (cfg.n_re, cfg.n_im):
        if not 1 <= n <= 512:
            raise ConfigError("grid resolution must lie in 1..512")
    return cfg


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------


def cplx(z):
    z = complex(z)
    return {"re": float(z.real), "im": float(z.imag)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return cplx(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def to_json(cfg, result, diagnostics):
    env = {"config": cfg.echo(), "result": result, "diagnostics": diagnostics}
    return json.dumps(_jsonable(env), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _fmt(v):
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def to_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _mode_row(md):
    return {
        "n": md.n,
        "gamma": md.gamma,
        "k_axial": md.k_axial,
        "norm": md.norm,
        "class": md.kind.value,
        "residual": md.residual,
    }


def _cmd_modes(cfg):
    ms = find_modes(cfg.spec(), cfg.n_modes, threshold=cfg.threshold)
    rows = [_mode_row(md) for md in ms]
    diag = {"near_ep": ms.near_ep, "max_residual": max(md.residual for md in ms)}
    diag.update({k: v for k, v in ms.diagnostics.items()})
    header = ["n", "gamma_re", "gamma_im", "k_axial_re", "k_axial_im", "norm", "class", "residual"]
    csv_rows = [
        [r["n"], r["gamma"].real, r["gamma"].imag, r["k_axial"].real, r["k_axial"].imag, r["norm"], r["class"], r["residual"]]
        for r in rows
    ]
    return {"modes": rows}, diag, header, csv_rows


def _ep_row(ep):
    return {
        "pair": list(ep.pair),
        "beta_ep": ep.beta_ep,
        "gamma_ep": ep.gamma_ep,
        "sqrt_coeff": ep.sqrt_coeff,
        "residual_f": ep.residual_f,
        "residual_df": ep.residual_df,
    }


def _cmd_ep(cfg):
    eps = enumerate_eps(cfg.m, cfg.K, cfg.count)
    rows = [_ep_row(e) for e in eps]
    diag = {"max_residual": max(max(e.residual_f, e.residual_df) for e in eps)}
    header = ["lower_mode", "upper_mode", "beta_re", "beta_im", "gamma_re", "gamma_im", "coeff_re", "coeff_im", "residual_f", "residual_df"]
    csv_rows = [
        [e.pair[0], e.pair[1], e.beta_ep.real, e.beta_ep.imag, e.gamma_ep.real, e.gamma_ep.imag,
         e.sqrt_coeff.real, e.sqrt_coeff.imag, e.residual_f, e.residual_df]
        for e in eps
    ]
    return {"eps": rows}, diag, header, csv_rows


def _cmd_encircle(cfg):
    ep = enumerate_eps(cfg.m, cfg.K, cfg.ep_index + 1)[cfg.ep_index]
    loop = [complex(a, b) for a, b in cfg.loop]
    perm = encircle_ep(ep, loop, nodes=cfg.loop_nodes, turns=cfg.turns)
    swapped = list(perm) != sorted(perm)
    res = {"ep": _ep_row(ep), "permutation": [ep.pair[k] for k in perm], "pair": list(ep.pair), "swapped": swapped}
    diag = {"ep_residual": max(ep.residual_f, ep.residual_df)}
    header = ["start_mode", "end_mode"]
    csv_rows = [[ep.pair[i], ep.pair[k]] for i, k in enumerate(perm)]
    return res, diag, header, csv_rows


def _cmd_nonortho(cfg):
    ms = find_modes(cfg.spec(), cfg.n_modes, threshold=cfg.threshold)
    reps = [kp(md, cfg.kp_cap) for md in ms]
    S = sij_matrix(ms).s
    rows = [
        {"n": r.mode_index, "gamma": md.gamma, "kp": r.kp, "kp_prime": r.kp_prime, "self_overlap": r.self_overlap, "capped": r.capped}
        for r, md in zip(reps, ms)
    ]
    diag = {"near_ep": ms.near_ep, "capped_modes": [r.mode_index for r in reps if r.capped], "max_residual": max(md.residual for md in ms)}
    header = ["n", "gamma_re", "gamma_im", "kp", "kp_prime_re", "kp_prime_im", "self_overlap_re", "self_overlap_im", "capped"]
    csv_rows = [
        [r["n"], r["gamma"].real, r["gamma"].imag, r["kp"], r["kp_prime"].real, r["kp_prime"].imag,
         r["self_overlap"].real, r["self_overlap"].imag, int(r["capped"])]
        for r in rows
    ]
    return {"modes": rows, "S": S}, diag, header, csv_rows


def _junction_diag(sol):
    d = dict(sol.diagnostics)
    d.update(continuity_residuals(sol))
    d["incident_flux"] = incident_flux(sol)
    d["reflected_flux"] = reflected_flux(sol)
    d["rigid_net_flux"] = rigid_flux(sol)
    d["max_residual"] = max(md.residual for md in sol.modes)
    return d


def _cmd_junction(cfg):
    sol = solve_junction(cfg.spec(), N=cfg.n_modes)
    res = {"A": sol.A, "B": sol.B, "C": sol.C, "Kr": sol.Kr, "Kl": sol.Kl, "kp_prime": sol.kp_prime_diag, "gamma": sol.modes.gammas}
    header = ["n", "A_re", "A_im", "B_re", "B_im", "C_re", "C_im", "Kr_re", "Kr_im", "Kl_re", "Kl_im"]
    csv_rows = [
        [n, a.real, a.imag, b.real, b.imag, c.real, c.imag, kr.real, kr.imag, kl.real, kl.imag]
        for n, (a, b, c, kr, kl) in enumerate(zip(sol.A, sol.B, sol.C, sol.Kr, sol.Kl))
    ]
    return res, _junction_diag(sol), header, csv_rows


def _cmd_power(cfg):
    sol = solve_junction(cfg.spec(), N=cfg.n_modes)
    z = np.linspace(0.0, cfg.zmax, cfg.nz)
    pp = power_profile(sol, z)
    res = {"z": pp.z, "W_total": pp.W_total, "W_modal": pp.W_modal, "W_cross": pp.W_cross, "decay_rates": modal_decay_rates(sol)}
    diag = _junction_diag(sol)
    diag["interface_mismatch"] = abs(pp.W_total[0] - diag["rigid_net_flux"]) / diag["incident_flux"]
    header = ["z_radii", "W_total", "W_modal", "W_cross"]
    csv_rows = [[a, b, c, d] for a, b, c, d in zip(pp.z, pp.W_total, pp.W_modal, pp.W_cross)]
    return res, diag, header, csv_rows


def _cmd_sweep(cfg):
    spec = cfg.spec()
    g = sweep(spec, (cfg.re_min, cfg.re_max), (cfg.im_min, cfg.im_max), (cfg.n_re, cfg.n_im), cfg.quantity,
              n_modes=min(cfg.n_modes, 10), cap=cfg.kp_cap)
    vals = np.where(np.isfinite(g.values), g.values, np.nan)
    res = {
        "re_axis": g.re_axis,
        "im_axis": g.im_axis,
        "quantity": g.quantity.value,
        "values": vals,
        "gamma": g.gammas,
        "mask": g.mask,
        "ep_markers": [_ep_row(e) for e in g.ep_markers],
    }
    diag = {"masked_cells": int(g.mask.sum())}
    if g.values.ndim == 3:
        header = ["beta_re", "beta_im", "mode", "value", "masked"]
        csv_rows = [
            [g.re_axis[ix], g.im_axis[iy], k, float(g.values[k, iy, ix]), int(g.mask[iy, ix])]
            for iy in range(g.im_axis.size) for ix in range(g.re_axis.size) for k in range(g.values.shape[0])
        ]
    else:
        header = ["beta_re", "beta_im", "mode_i", "mode_j", "value", "masked"]
        n = g.values.shape[0]
        csv_rows = [
            [g.re_axis[ix], g.im_axis[iy], i, j, float(g.values[i, j, iy, ix]), int(g.mask[iy, ix])]
            for iy in range(g.im_axis.size) for ix in range(g.re_axis.size) for i in range(n) for j in range(n)
        ]
    return res, diag, header, csv_rows


_DISPATCH = {
    "modes": _cmd_modes,
    "ep": _cmd_ep,
    "encircle": _cmd_encircle,
    "nonortho": _cmd_nonortho,
    "junction": _cmd_junction,
    "power": _cmd_power,
    "sweep": _cmd_sweep,
}


def execute(cfg):
    """Run ``cfg`` and return the serialised output text."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result, diag, header, rows = _DISPATCH[cfg.command](cfg)
    diag = dict(diag)
    diag["warnings"] = sorted({str(w.message) for w in caught if issubclass(w.category, RuntimeWarning)})
    diag["version"] = __version__
    diag["backend"] = BACKEND
    if cfg.format == "json":
        return to_json(cfg, result, diag)
    return to_csv(header, rows)


def run(cfg):
    """Execute ``cfg`` and write its output; returns an exit status."""
    try:
        text = execute(cfg)
    except (ConfigError, RangeExceededError, OutOfDiskError, ValueError) as exc:
        print(f"ductmodes: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DuctModesError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"ductmodes: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    try:
        if cfg.output_path in (None, "", "-"):
            sys.stdout.write(text)
        else:
            with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
    except OSError as exc:
        print(f"ductmodes: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


# ---------------------------------------------------------------------------
# figure recipes
# ---------------------------------------------------------------------------


def _sweep_cfg(quantity, re, im, n, n_modes=2):
    return RunConfig(
        command="sweep", quantity=quantity, re_min=re[0], re_max=re[1], im_min=im[0], im_max=im[1],
        n_re=n[0], n_im=n[1], n_modes=n_modes,
    )


def figure_recipe(name):
    """Run configurations that regenerate the data behind a figure.

    Returns a list (most figures need one run, a few need several).
    """
    key = str(name).strip().lower().replace("fig", "")
    try:
        idx = int(key)
    except ValueError:
        idx = -1
    if idx == 1:
        return [RunConfig(command="modes", beta_re=0.4, beta_im=0.2, n_modes=30)]
    if idx == 2:
        return [RunConfig(command="modes", m=m, beta_re=0.4, beta_im=0.2, n_modes=30) for m in range(31)]
    if idx == 3:
        return [_sweep_cfg(q, (0.095, 0.105), (im, im), (201, 1)) for im in (0.042655, 0.042652) for q in ("GammaRe", "GammaIm")]
    if idx == 4:
        return [_sweep_cfg(q, (0.099, 0.099), (0.0, 0.08), (1, 161)) for q in ("SijRe", "SijIm")]
    if idx == 5:
        return [_sweep_cfg("Kp", (0.099, 0.099), (0.0, 0.08), (1, 161))]
    if idx == 6:
        return [_sweep_cfg(q, (re, re), (0.0, 0.05), (1, 201)) for re in (0.09935, 0.09933) for q in ("GammaRe", "GammaIm")]
    if idx == 7:
        return [RunConfig(command="ep", count=10)]
    if idx == 8:
        return [_sweep_cfg("GammaRe", (0.0, 0.3), (0.0, 0.1), (61, 41), n_modes=3)]
    if idx == 9:
        return [_sweep_cfg("GammaIm", (0.0, 0.3), (0.0, 0.1), (61, 41), n_modes=3)]
    if idx == 10:
        return [_sweep_cfg(q, (0.05, 0.15), (0.0, 0.1), (81, 81)) for q in ("SijRe", "SijIm")]
    if idx == 11:
        return [_sweep_cfg("Kp", (0.05, 0.15), (0.0, 0.1), (81, 81))]
    if idx == 12:
        return [
            RunConfig(command="power", impedance_re=0.1, impedance_im=-1.0),
            RunConfig(command="power", beta_re=0.0993, beta_im=0.0427),
        ]
    if idx == 13:
        return [
            RunConfig(command="nonortho", impedance_re=0.1, impedance_im=-1.0),
            RunConfig(command="nonortho", beta_re=0.0993, beta_im=0.0427),
        ]
    raise ConfigError(f"unknown figure {name!r}; expected Fig1..Fig13")


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _parser():
    p = argparse.ArgumentParser(prog="ductmodes", description="Lined circular duct modes, exceptional points and junction power.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config (or a previous JSON output) to replay")
        sp.add_argument("--K", type=float)
        sp.add_argument("--m", type=int)
        sp.add_argument("--beta-re", type=float, dest="beta_re")
        sp.add_argument("--beta-im", type=float, dest="beta_im")
        sp.add_argument("--impedance-re", type=float, dest="impedance_re")
        sp.add_argument("--impedance-im", type=float, dest="impedance_im")
        sp.add_argument("--n", type=int, dest="n_modes", help="number of modes / truncation")
        sp.add_argument("--format", choices=["json", "csv"])
        sp.add_argument("--output", "-o", dest="output_path")
        sp.add_argument("--threshold", type=float, help="surface-mode threshold on Im(gamma)")
        sp.add_argument("--kp-cap", type=float, dest="kp_cap")

    for name in COMMANDS:
        sp = sub.add_parser(name)
        common(sp)
        if name == "ep":
            sp.add_argument("--count", type=int)
        if name == "encircle":
            sp.add_argument("--ep-index", type=int, dest="ep_index")
            sp.add_argument("--loop", type=json.loads, help="JSON list of [re, im] admittance nodes")
            sp.add_argument("--loop-nodes", type=int, dest="loop_nodes")
            sp.add_argument("--turns", type=int)
        if name == "power":
            sp.add_argument("--zmax", type=float)
            sp.add_argument("--nz", type=int)
        if name == "sweep":
            for f in ("re_min", "re_max", "im_min", "im_max"):
                sp.add_argument("--" + f.replace("_", "-"), type=float, dest=f)
            sp.add_argument("--n-re", type=int, dest="n_re")
            sp.add_argument("--n-im", type=int, dest="n_im")
            sp.add_argument("--quantity", choices=[q.value for q in Quantity])

    fp = sub.add_parser("figure", help="print (or run) the configurations behind a figure")
    fp.add_argument("name", help="Fig1..Fig13")
    fp.add_argument("--run", action="store_true", help="execute the recipe instead of printing it")
    fp.add_argument("--format", choices=["json", "csv"])
    return p


def _load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if isinstance(raw, dict) and "config" in raw and "result" in raw:
        raw = raw["config"]
    return raw


def main(argv=None):
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        if args.command == "figure":
            cfgs = figure_recipe(args.name)
            if args.format:
                for c in cfgs:
                    c.format = args.format
            if not args.run:
                sys.stdout.write(json.dumps([_jsonable(c.echo()) for c in cfgs], indent=2, sort_keys=True) + "\n")
                return EXIT_OK
            status = EXIT_OK
            for c in cfgs:
                status = max(status, run(c))
            return status
        raw = {}
        if args.config:
            raw.update(_load_config(args.config))
        for key, value in vars(args).items():
            if key in ("config",) or value is None:
                continue
            raw[key] = value
        raw["command"] = args.command
        cfg = validate(raw)
    except ConfigError as exc:
        print(f"ductmodes: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"ductmodes: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
