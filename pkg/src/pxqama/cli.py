"""Command-line front end.

Every subcommand reads a JSON config (``--config``) with a ``version``
field; SNRs there are in dB and are converted once, here, before any
library call. Outputs go to ``--out`` (a directory) or stdout.

Exit codes: 0 success, 2 config error, 3 numeric or degenerate scenario.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .demapper import bit_llrs, exact_llr
from .geometry import (ChannelPair, DegenerateChannelError,
                       DegenerateModeError, equivalent_channels,
                       make_channels, make_precoders)
from .hqam import (DistanceProfile, ModeConfig, OrderingError,
                   build_hier_pam, compose_received_constellation,
                   map_private, map_shared, received_layers)
from .inforate import user_rates
from .region import (ModeSelectionError, SweepGrid, build_region,
                     read_region_csv, region_summary, select_modes, sweep,
                     write_region_csv)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(Exception):
    pass


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def _fmt(x) -> str:
    return format(float(x), ".12g")


# -- config ----------------------------------------------------------------

_SCENARIO_KEYS = {"gamma1_db", "gamma2_db", "rho_abs", "rho_phase", "sigma2", "n_t"}
_GRID_KEYS = {"theta_points", "power_step", "max_branch_bits", "family",
              "sizes", "ratios", "iq_dedup"}
_MODE_KEYS = {"m0", "n0", "m1", "n1", "m2", "n2", "ratios", "theta0",
              "theta0_frac", "alphas", "assign_i", "assign_q"}
_TOP_KEYS = {"version", "scenario", "grid", "mode", "seed", "n_samples",
             "select_modes", "n_nodes", "workers", "overlay", "metric"}


@dataclass
class ScenarioConfig:
    gamma1_db: float = 10.0
    gamma2_db: float = 20.0
    rho_abs: float = 0.6
    rho_phase: float = 0.0
    sigma2: float = 1.0
    n_t: int = 2

    def channels(self) -> ChannelPair:
        lam1 = math.sqrt(db_to_linear(self.gamma1_db) * self.sigma2)
        lam2 = math.sqrt(db_to_linear(self.gamma2_db) * self.sigma2)
        rho = self.rho_abs * complex(math.cos(self.rho_phase),
                                     math.sin(self.rho_phase))
        return make_channels(lam1, lam2, rho, self.n_t, self.sigma2)


@dataclass
class Config:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    grid: dict = field(default_factory=dict)
    mode: dict = field(default_factory=dict)
    seed: int = 0
    n_samples: int = 1000
    select_modes: int = 5
    n_nodes: int = 64
    workers: int = 1
    overlay: list = field(default_factory=list)
    metric: str = "piecewise"


def _reject_unknown(section: str, got: dict, allowed: set) -> None:
    unknown = sorted(set(got) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {section}: {', '.join(unknown)}")


def parse_config(text: str, source: str = "<config>") -> Config:
    """Parse and validate a JSON config document."""
    try:
        raw = json.loads(text) if text.strip() else {"version": SCHEMA_VERSION}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: top level must be an object")
    _reject_unknown("config", raw, _TOP_KEYS)
    if raw.get("version") != SCHEMA_VERSION:
        raise ConfigError(f"{source}: version must be {SCHEMA_VERSION}, "
                          f"got {raw.get('version')!r}")
    scen = raw.get("scenario", {})
    _reject_unknown("scenario", scen, _SCENARIO_KEYS)
    grid = raw.get("grid", {})
    _reject_unknown("grid", grid, _GRID_KEYS)
    mode = raw.get("mode", {})
    _reject_unknown("mode", mode, _MODE_KEYS)
    try:
        sc = ScenarioConfig(**{k: (int(v) if k == "n_t" else float(v))
                               for k, v in scen.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: bad scenario value: {exc}") from None
    if not 0 <= sc.rho_abs < 1:
        raise ConfigError(f"{source}: rho_abs must lie in [0, 1)")
    if not (math.isfinite(sc.gamma1_db) and math.isfinite(sc.gamma2_db)):
        raise ConfigError(f"{source}: SNRs must be finite")
    if not sc.sigma2 > 0:
        raise ConfigError(f"{source}: sigma2 must be positive")
    if "sizes" in grid and not grid["sizes"]:
        raise ConfigError(f"{source}: grid.sizes is empty")
    if "ratios" in grid and not grid["ratios"]:
        raise ConfigError(f"{source}: grid.ratios is empty")
    cfg = Config(scenario=sc, grid=grid, mode=mode)
    for key in ("seed", "n_samples", "select_modes", "n_nodes", "workers"):
        if key in raw:
            try:
                setattr(cfg, key, int(raw[key]))
            except (TypeError, ValueError):
                raise ConfigError(f"{source}: {key} must be an integer") from None
    cfg.overlay = list(raw.get("overlay", []))
    cfg.metric = raw.get("metric", "piecewise")
    if cfg.metric not in ("piecewise", "dual_min"):
        raise ConfigError(f"{source}: metric must be piecewise or dual_min")
    return cfg


def load_config(path: str | None) -> Config:
    if path is None:
        return parse_config("")
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text, path)


def grid_from_config(cfg: Config) -> SweepGrid:
    g = dict(cfg.grid)
    if "sizes" in g:
        g["sizes"] = tuple(tuple(s) for s in g["sizes"])
    if "ratios" in g:
        g["ratios"] = tuple(g["ratios"])
    try:
        return SweepGrid(**g)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid grid: {exc}") from None


def mode_from_config(cfg: Config, ch: ChannelPair) -> ModeConfig:
    """Single mode from the ``mode`` section.

    Defaults: all-QPSK, shared I bit to user 1 and Q bit to user 2, beam
    angle at half the Hermitian angle.
    """
    md = dict(cfg.mode)
    m0, n0 = int(md.get("m0", 1)), int(md.get("n0", 1))
    m1, n1 = int(md.get("m1", 1)), int(md.get("n1", 1))
    m2, n2 = int(md.get("m2", m1)), int(md.get("n2", n1))
    r0, r1, r2 = md.get("ratios", [2.0, 2.0, 2.0])
    if "theta0" in md and "theta0_frac" in md:
        raise ConfigError("give either mode.theta0 or mode.theta0_frac")
    theta0 = float(md.get("theta0", float(md.get("theta0_frac", 0.5)) * ch.theta))
    alphas = md.get("alphas")
    if alphas is None:
        # most power on the shared beam keeps the superposition ordered
        priv = np.array([m1 + n1 > 0, m2 + n2 > 0], dtype=float)
        if m0 + n0 == 0:
            p = np.r_[0.0, priv]
        elif priv.any():
            p = np.r_[0.9, 0.1 * priv / priv.sum()]
        else:
            p = np.array([1.0, 0.0, 0.0])
        if not p.sum():
            raise ConfigError("mode carries no bits")
        alphas = list(np.sqrt(p / p.sum()))
    else:
        a = np.asarray(alphas, dtype=float)
        power = float(np.sum(a * a)) if a.shape == (3,) else 0.0
        # amplitudes typed with a few digits are renormalized
        if abs(power - 1.0) <= 1e-3:
            alphas = list(a / math.sqrt(power))
    assign_i = md.get("assign_i", [1] * m0)
    assign_q = md.get("assign_q", [2] * n0)
    try:
        return ModeConfig(DistanceProfile.uniform(m0, n0, r0),
                          DistanceProfile.uniform(m1, n1, r1),
                          DistanceProfile.uniform(m2, n2, r2),
                          theta0, tuple(alphas), tuple(assign_i), tuple(assign_q))
    except OrderingError:
        raise
    except ValueError as exc:
        raise ConfigError(f"invalid mode: {exc}") from None


# -- outputs ---------------------------------------------------------------

def _open_out(args, name: str):
    if args.out is None:
        return sys.stdout, False
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return open(out / name, "w", newline=""), True


def _emit(args, name: str, text: str) -> None:
    fh, close = _open_out(args, name)
    fh.write(text)
    if close:
        fh.close()


def _label(bits) -> str:
    return "".join(str(int(b)) for b in bits)


def constellation_rows(mode: ModeConfig, eqs) -> list[list]:
    rows = []
    comps = {"s0": mode.shared, "s1": mode.private1, "s2": mode.private2}
    for name, prof in comps.items():
        for branch, d in (("I", prof.i_distances), ("Q", prof.q_distances)):
            pam = build_hier_pam(len(d), d)
            for j, (pt, lab) in enumerate(zip(pam.points, pam.labels)):
                rows.append(["component", name, branch, j, _fmt(pt), _label(lab)])
    for u, eq in ((1, eqs[0]), (2, eqs[1])):
        pam_i, pam_q = compose_received_constellation(mode, eq, u)
        for branch, pam in (("I", pam_i), ("Q", pam_q)):
            for j, (pt, lab) in enumerate(zip(pam.points, pam.labels)):
                rows.append(["composite", f"user{u}", branch, j, _fmt(pt),
                             _label(lab)])
    return rows


CONSTELLATION_HEADER = ["kind", "symbol", "branch", "index", "point", "label"]


def read_constellation_csv(text: str) -> dict:
    """Parse a ``map`` dump into {(kind, symbol, branch): (points, labels)}."""
    out: dict = {}
    for row in csv.DictReader(io.StringIO(text)):
        key = (row["kind"], row["symbol"], row["branch"])
        pts, labs = out.setdefault(key, ([], []))
        pts.append(float(row["point"]))
        labs.append(row["label"])
    return {k: (np.array(p), l) for k, (p, l) in out.items()}


def cmd_map(args, cfg: Config) -> int:
    ch = cfg.scenario.channels()
    mode = mode_from_config(cfg, ch)
    eqs = equivalent_channels(ch, make_precoders(ch, mode.theta0, mode.alphas), mode)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CONSTELLATION_HEADER)
    w.writerows(constellation_rows(mode, eqs))
    _emit(args, "constellation.csv", buf.getvalue())
    return EXIT_OK


def _user_json(eq) -> dict:
    comp = eq.composite
    return {"gain": eq.gain, "phase": eq.phase,
            "beta_shared": eq.beta_shared, "beta_private": eq.beta_private,
            "branch_noise_var": eq.branch_noise_var,
            "composite_i": list(comp.i_distances) if comp else None,
            "composite_q": list(comp.q_distances) if comp else None}


def _cvec(v) -> list:
    return [[float(z.real), float(z.imag)] for z in v]


def cmd_precode(args, cfg: Config) -> int:
    ch = cfg.scenario.channels()
    mode = mode_from_config(cfg, ch)
    pre = make_precoders(ch, mode.theta0, mode.alphas)
    eqs = equivalent_channels(ch, pre, mode)
    out = {"rho": [ch.rho.real, ch.rho.imag], "theta": ch.theta,
           "theta0": pre.theta0, "alphas": list(pre.alphas),
           "p0": _cvec(pre.p0), "p1": _cvec(pre.p1), "p2": _cvec(pre.p2),
           "user1": _user_json(eqs[0]), "user2": _user_json(eqs[1])}
    _emit(args, "precoders.json", json.dumps(out, indent=2) + "\n")
    return EXIT_OK


def simulate(ch: ChannelPair, mode: ModeConfig, n: int, seed: int):
    """Random bits through the precoded channel; returns per-user samples and bits."""
    rng = np.random.default_rng(seed)
    m0, n0, m1, n1, m2, n2 = mode.sizes
    b0i = rng.integers(0, 2, (n, m0))
    b0q = rng.integers(0, 2, (n, n0))
    b1i, b1q = rng.integers(0, 2, (n, m1)), rng.integers(0, 2, (n, n1))
    b2i, b2q = rng.integers(0, 2, (n, m2)), rng.integers(0, 2, (n, n2))
    s0 = map_shared(b0i, b0q, mode.shared)
    s1 = map_private(b1i, b1q, b0i, b0q, mode.private1)
    s2 = map_private(b2i, b2q, b0i, b0q, mode.private2)
    pre = make_precoders(ch, mode.theta0, mode.alphas)
    x = np.stack([s0, s1, s2], axis=-1) @ pre.matrix().T
    noise = np.sqrt(ch.sigma2 / 2) * (rng.standard_normal((2, n))
                                      + 1j * rng.standard_normal((2, n)))
    y1 = x @ ch.h1.conj() + noise[0]
    y2 = x @ ch.h2.conj() + noise[1]
    bits = {1: (np.hstack([b0i, b1i]), np.hstack([b0q, b1q])),
            2: (np.hstack([b0i, b2i]), np.hstack([b0q, b2q]))}
    return (y1, y2), bits, pre


def cmd_llr(args, cfg: Config) -> int:
    ch = cfg.scenario.channels()
    mode = mode_from_config(cfg, ch)
    (y1, y2), bits, pre = simulate(ch, mode, cfg.n_samples, cfg.seed)
    eqs = equivalent_channels(ch, pre, mode)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["user", "sample", "y_re", "y_im", "branch", "bit", "sent", "llr"])
    for u, y in ((1, y1), (2, y2)):
        eq = eqs[u - 1]
        if eq.beta_shared == 0 or eq.beta_private == 0:
            # receivers only see layers with nonzero weight
            vis_i, vis_q = received_layers(mode, eq, u)
        else:
            vis_i = np.ones(bits[u][0].shape[1], bool)
            vis_q = np.ones(bits[u][1].shape[1], bool)
        pam_i, pam_q = compose_received_constellation(mode, eq, u)
        llr = bit_llrs(y, eq, pam_i, pam_q, cfg.metric)
        sent_i, sent_q = bits[u][0][:, vis_i], bits[u][1][:, vis_q]
        for t in range(y.size):
            for branch, sent, vals in (("I", sent_i, llr.llr_i), ("Q", sent_q, llr.llr_q)):
                for k in range(vals.shape[1]):
                    w.writerow([u, t, _fmt(y[t].real), _fmt(y[t].imag), branch,
                                k + 1, int(sent[t, k]), _fmt(vals[t, k])])
    _emit(args, "llr.csv", buf.getvalue())
    return EXIT_OK


def cmd_rates(args, cfg: Config) -> int:
    ch = cfg.scenario.channels()
    mode = mode_from_config(cfg, ch)
    pre = make_precoders(ch, mode.theta0, mode.alphas)
    eqs = equivalent_channels(ch, pre, mode)
    pt = user_rates(mode, eqs, n_nodes=cfg.n_nodes)
    out = {"R1": pt.r1, "R2": pt.r2,
           "user1": {"mi_i": pt.bit_rates.mi_i[0].tolist(),
                     "mi_q": pt.bit_rates.mi_q[0].tolist()},
           "user2": {"mi_i": pt.bit_rates.mi_i[1].tolist(),
                     "mi_q": pt.bit_rates.mi_q[1].tolist()},
           "assign_i": list(mode.assign_i), "assign_q": list(mode.assign_q)}
    _emit(args, "rates.json", json.dumps(out, indent=2) + "\n")
    return EXIT_OK


def read_overlay(path: str) -> dict:
    """External baseline curves: CSV with columns label, R1, R2."""
    curves: dict = {}
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if not {"R1", "R2"} <= set(reader.fieldnames or ()):
                raise ConfigError(f"{path}: overlay needs R1 and R2 columns")
            for row in reader:
                curves.setdefault(row.get("label") or Path(path).stem, []).append(
                    (float(row["R1"]), float(row["R2"])))
    except OSError as exc:
        raise ConfigError(f"cannot read overlay: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return curves


def cmd_region(args, cfg: Config) -> int:
    ch = cfg.scenario.channels()
    grid = grid_from_config(cfg)
    workers = args.workers if args.workers is not None else cfg.workers
    sw = sweep(ch, grid, n_nodes=cfg.n_nodes, workers=workers)
    if not len(sw):
        raise DegenerateModeError("no valid mode in the grid")
    region = build_region(sw)
    extra = {"scenario": vars(cfg.scenario), "grid": _grid_json(grid)}
    selection = None
    n_sel = min(cfg.select_modes, region.n_frontier)
    if n_sel >= 2:
        # a short frontier is reported whole rather than failing the sweep
        selection = select_modes(region, n_sel)
    overlays = {}
    for path in (args.overlay or []) + cfg.overlay:
        for label, pts in read_overlay(path).items():
            ov = build_region(pts)
            overlays[label] = {"area": ov.area,
                               "pxqama_area_ratio": region.area / ov.area
                               if ov.area > 0 else None}
    if overlays:
        extra["overlays"] = overlays
    summary = region_summary(region, selection, extra)
    if args.out is None:
        print(json.dumps(summary, indent=2))
        return EXIT_OK
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_region_csv(out / "region.csv", region)
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return EXIT_OK


def _grid_json(grid: SweepGrid) -> dict:
    return {"theta_points": grid.theta_points, "power_step": grid.power_step,
            "max_branch_bits": grid.max_branch_bits, "family": grid.family,
            "sizes": [list(s) for s in grid.sizes] if grid.sizes else None,
            "ratios": list(grid.ratios), "iq_dedup": grid.iq_dedup}


def cmd_modes(args, cfg: Config) -> int:
    src = Path(args.region)
    csv_path = src / "region.csv" if src.is_dir() else src
    try:
        sw = read_region_csv(csv_path)
    except OSError as exc:
        raise ConfigError(f"cannot read region output: {exc}") from None
    region = build_region(sw)
    n = args.n_modes if args.n_modes is not None else cfg.select_modes
    if n == 0 or (args.all):
        n = region.n_frontier
    sel = select_modes(region, n)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["mode_id", "m0", "n0", "m1", "n1", "theta0", "a0", "a1", "a2",
                "assignment_mask_i", "assignment_mask_q", "R1", "R2"])
    for i in sel.indices:
        row = sw.table[i]
        w.writerow([int(row["mode_id"])] + [int(row[c]) for c in ("m0", "n0", "m1", "n1")]
                   + [_fmt(row[c]) for c in ("theta0", "a0", "a1", "a2")]
                   + [int(row["assignment_mask_i"]), int(row["assignment_mask_q"]),
                      _fmt(row["R1"]), _fmt(row["R2"])])
    w.writerow([])
    w.writerow(["polygon_area_ratio", _fmt(sel.ratio)])
    _emit(args, "modes.csv", buf.getvalue())
    return EXIT_OK


COMMANDS = {"map": cmd_map, "precode": cmd_precode, "llr": cmd_llr,
            "rates": cmd_rates, "region": cmd_region, "modes": cmd_modes}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pxqama", description="Two-user parallax QAMA toolkit.")
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", metavar="DIR")
    common.add_argument("--workers", type=int)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("map", parents=[common],
                   help="dump component and composite constellations")
    sub.add_parser("precode", parents=[common],
                   help="precoders and equivalent channels of a mode")
    sub.add_parser("llr", parents=[common],
                   help="simulate a mode and emit per-bit LLRs")
    sub.add_parser("rates", parents=[common],
                   help="bit-channel information and user rates of a mode")
    p = sub.add_parser("region", parents=[common],
                       help="sweep the mode grid and build the rate region")
    p.add_argument("--overlay", action="append", metavar="CSV",
                   help="external baseline curve (columns label,R1,R2)")
    p = sub.add_parser("modes", parents=[common],
                       help="reduce a region to a few transmission modes")
    p.add_argument("region", help="region output directory or region.csv")
    p.add_argument("-n", "--n-modes", type=int, dest="n_modes")
    p.add_argument("--all", action="store_true",
                   help="keep every frontier vertex")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModeSelectionError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OrderingError, DegenerateModeError, DegenerateChannelError,
            FloatingPointError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
