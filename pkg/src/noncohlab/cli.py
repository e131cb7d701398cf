"""Batch experiment driver.

Subcommands: check-singularity, sweep-snr, sweep-nr, design-codebook,
validate. Configuration is a TOML file; dB values are converted to linear
scale once at load time and all internal math is linear. Exit codes: 0 for a
passing/positive verdict, 2 for a negative verdict, 1 on error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import codebooks, matio
from .model import (
    Alphabet,
    ChannelModel,
    ModelError,
    NoiseModel,
    PowerConfig,
    SystemDims,
)
from .pep import pep_monte_carlo, pep_quadform, symbol_error_monte_carlo
from .detector import DetectorBank
from .divergence import equivalent_condition_stats, jeffreys_trace
from .model import conditional_covariance
from .singularity import full_singularity_report, large_array_curve


class ConfigError(ValueError):
    pass


def _fmt_prob(p: float) -> str:
    # scientific notation, 6 significant digits, locale-independent
    return f"{p:.5e}"


@dataclass
class ExperimentConfig:
    dims: SystemDims
    alphabet_spec: dict
    channel_spec: dict
    noise_spec: dict
    Pz: float
    gamma_db: list
    nr_grid: list
    trials: int
    seed: int
    out_dir: str
    design_spec: dict
    raw: dict

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"config parse error in {path}: {e}") from e

        def section(name, default=None):
            v = raw.get(name, default if default is not None else {})
            if not isinstance(v, dict):
                raise ConfigError(f"[{name}] must be a table")
            return v

        d = section("dims")
        for key in ("K", "Nt", "Nr"):
            if key not in d:
                raise ConfigError(f"[dims] missing field {key!r}")
        alph = section("alphabet")
        M = int(d.get("M", 0)) or _alphabet_size_hint(alph)
        try:
            dims = SystemDims(K=int(d["K"]), Nt=int(d["Nt"]), Nr=int(d["Nr"]), M=M)
        except ModelError as e:
            raise ConfigError(f"[dims]: {e}") from e

        power = section("power")
        Pz = float(power.get("Pz", 1.0))
        grid = power.get("gamma_db", power.get("snr_db", []))
        if not isinstance(grid, list):
            raise ConfigError("[power] gamma_db must be a list of dB values")
        sweep = section("sweep")
        nr_grid = [int(n) for n in sweep.get("nr", [dims.Nr])]
        trials = int(sweep.get("trials", 10000))
        if trials < 1:
            raise ConfigError("[sweep] trials must be >= 1")
        seed = int(sweep.get("seed", 0))
        out = section("output")
        return cls(
            dims=dims,
            alphabet_spec=alph,
            channel_spec=section("channel", {"profile": "isotropic"}),
            noise_spec=section("noise", {"profile": "isotropic"}),
            Pz=Pz,
            gamma_db=[float(g) for g in grid],
            nr_grid=nr_grid,
            trials=trials,
            seed=seed,
            out_dir=str(out.get("dir", "out")),
            design_spec=section("design"),
            raw=raw,
        )


def _alphabet_size_hint(alph: dict) -> int:
    kind = alph.get("kind", "")
    if kind == "energy":
        return len(alph.get("levels", []))
    if kind == "grassmannian":
        return int(alph.get("M", 1))
    if kind == "union":
        return sum(int(s) for s in alph.get("sizes", []))
    if kind == "file":
        path = alph.get("path", "")
        if not os.path.exists(path):
            raise ConfigError(f"[alphabet] file not found: {path}")
        return len(matio.load_matrices(path))
    raise ConfigError(f"[alphabet] unknown kind {kind!r}")


def build_alphabet(cfg: ExperimentConfig) -> Alphabet:
    a = cfg.alphabet_spec
    kind = a.get("kind")
    dims = cfg.dims
    if kind == "energy":
        return codebooks.energy_constellation(a["levels"], K=dims.K, Nt=dims.Nt)
    if kind == "grassmannian":
        cb = codebooks.random_grassmannian(int(a["M"]), dims.K, dims.Nt,
                                           int(a.get("seed", cfg.seed)))
        it = int(a.get("iterations", 0))
        if it:
            cb = codebooks.refine_packing(cb, it, float(a.get("step", 0.5)))
        return cb.alphabet
    if kind == "union":
        cb = codebooks.subspace_union_codebook(a["sizes"], dims.K, dims.Nt,
                                               int(a.get("seed", cfg.seed)))
        return cb.alphabet
    if kind == "file":
        mats = matio.load_matrices(a["path"])
        return Alphabet.from_matrices(mats, normalize=bool(a.get("normalize", True)))
    raise ConfigError(f"[alphabet] unknown kind {kind!r}")


def _spectrum_profile(spec: dict, dim: int, trace_target: float, what: str) -> np.ndarray:
    profile = spec.get("profile", "isotropic")
    if profile == "isotropic":
        return np.eye(dim) * (trace_target / dim)
    if profile == "polynomial-decay":
        p = float(spec.get("p", 1.0))
        w = np.arange(1, dim + 1, dtype=float) ** (-p)
        w *= trace_target / w.sum()
        return np.diag(w)
    if profile == "file":
        A = matio.load_matrix(spec["path"])
        if A.shape != (dim, dim):
            raise ConfigError(f"[{what}] file matrix has shape {A.shape}, expected ({dim}, {dim})")
        return A
    raise ConfigError(f"[{what}] unknown profile {profile!r}")


def build_channel(cfg: ExperimentConfig, Nr: int) -> ChannelModel:
    dim = cfg.dims.Nt * Nr
    return ChannelModel(_spectrum_profile(cfg.channel_spec, dim, 1.0, "channel"))


def build_noise(cfg: ExperimentConfig, Nr: int) -> NoiseModel:
    dim = cfg.dims.K * Nr
    Cz = _spectrum_profile(cfg.noise_spec, dim, cfg.dims.K * Nr * cfg.Pz, "noise")
    return NoiseModel(Cz=Cz, Pz=cfg.Pz)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _best_effort_svg(path, plot_fn):
    """Plots are best-effort: a failure here must never corrupt CSV output."""
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots()
        plot_fn(ax)
        fig.savefig(path, format="svg")
        plt.close(fig)
    except Exception as e:  # pragma: no cover
        print(f"warning: SVG generation failed: {e}", file=sys.stderr)


def cmd_check_singularity(cfg: ExperimentConfig) -> int:
    alphabet = build_alphabet(cfg)
    dims = cfg.dims
    ch = build_channel(cfg, dims.Nr)
    nz = build_noise(cfg, dims.Nr)
    gamma_db = cfg.gamma_db[0] if cfg.gamma_db else 10.0
    pw = PowerConfig.from_gamma_db(gamma_db, Pz=cfg.Pz)
    report = full_singularity_report(alphabet, ch, nz, pw, dims)
    os.makedirs(cfg.out_dir, exist_ok=True)
    with open(os.path.join(cfg.out_dir, "singularity.json"), "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)
    lines = [f"{'pair':>8} {'colsp_distinct':>15} {'identifiable':>13} {'min_angle':>12}"]
    for p in report.pairs:
        lines.append(
            f"{p.a}-{p.b:>6} {str(p.colsp_distinct):>15} "
            f"{str(p.unique_identifiable):>13} {p.min_principal_angle:>12.4e}"
        )
    lines.append(f"high-SNR singular detection: {report.asd_high_snr}")
    lines.append(f"unique identifiability (necessary condition): {report.identifiability_ok}")
    text = "\n".join(lines) + "\n"
    with open(os.path.join(cfg.out_dir, "singularity.txt"), "w") as fh:
        fh.write(text)
    print(text, end="")
    return 0 if report.asd_high_snr else 2


def cmd_sweep_snr(cfg: ExperimentConfig) -> int:
    if not cfg.gamma_db:
        raise ConfigError("[power] gamma_db grid must be nonempty")
    alphabet = build_alphabet(cfg)
    dims = cfg.dims
    ch = build_channel(cfg, dims.Nr)
    nz = build_noise(cfg, dims.Nr)
    pep_rows = []
    err_rows = []
    curves = {}
    for gdb in cfg.gamma_db:
        pw = PowerConfig.from_gamma_db(gdb, Pz=cfg.Pz)
        bank = DetectorBank.from_alphabet(alphabet, ch, nz, pw, dims.Nr)
        for a in range(alphabet.M):
            for b in range(alphabet.M):
                if a == b:
                    continue
                mc = pep_monte_carlo(bank.covariances[a], bank.covariances[b],
                                     cfg.trials, cfg.seed)
                qf = pep_quadform(bank.covariances[a], bank.covariances[b])
                for est in (mc, qf):
                    pep_rows.append([f"{gdb:g}", a, b, _fmt_prob(est.value),
                                     _fmt_prob(est.ci95), est.method])
                curves.setdefault((a, b), []).append((gdb, qf.value))
        res = symbol_error_monte_carlo(alphabet, ch, nz, pw, dims,
                                       cfg.trials, cfg.seed)
        err_rows.append([f"{gdb:g}", "avg", _fmt_prob(res.average), _fmt_prob(res.ci95)])
        for i, r in enumerate(res.per_codeword):
            err_rows.append([f"{gdb:g}", i, _fmt_prob(float(r)), ""])
    os.makedirs(cfg.out_dir, exist_ok=True)
    _write_csv(os.path.join(cfg.out_dir, "pep_vs_snr.csv"),
               ["snr_db", "pair_a", "pair_b", "pep", "ci95", "method"], pep_rows)
    _write_csv(os.path.join(cfg.out_dir, "symbol_error_vs_snr.csv"),
               ["snr_db", "codeword", "err_rate", "ci95"], err_rows)

    def plot(ax):
        for (a, b), pts in curves.items():
            xs, ys = zip(*pts)
            ax.semilogy(xs, np.maximum(ys, 1e-12), marker="o", label=f"{a}->{b}")
        ax.set_xlabel("gamma [dB]")
        ax.set_ylabel("pairwise error probability")
        ax.legend(fontsize=6)

    _best_effort_svg(os.path.join(cfg.out_dir, "pep_vs_snr.svg"), plot)
    return 0


def cmd_sweep_nr(cfg: ExperimentConfig) -> int:
    if len(cfg.nr_grid) < 4:
        raise ConfigError("[sweep] nr grid must have length >= 4")
    alphabet = build_alphabet(cfg)
    dims = cfg.dims
    gamma_db = cfg.gamma_db[0] if cfg.gamma_db else 10.0
    pw = PowerConfig.from_gamma_db(gamma_db, Pz=cfg.Pz)

    def family(nr):
        return alphabet, build_channel(cfg, nr), build_noise(cfg, nr), pw

    rows = []
    sym_err = {}
    for nr in cfg.nr_grid:
        _, ch, nz, _ = family(nr)
        d = SystemDims(K=dims.K, Nt=dims.Nt, Nr=nr, M=dims.M)
        res = symbol_error_monte_carlo(alphabet, ch, nz, pw, d, cfg.trials, cfg.seed)
        sym_err[nr] = res.average
        covs = [conditional_covariance(c, ch, nz, pw, nr) for c in alphabet.codewords]
        for a in range(alphabet.M):
            for b in range(a + 1, alphabet.M):
                j = jeffreys_trace(covs[a], covs[b])
                frob, smin = equivalent_condition_stats(covs[a], covs[b])
                rows.append([nr, f"{a}-{b}", _fmt_prob(j), _fmt_prob(frob),
                             _fmt_prob(smin), _fmt_prob(res.average)])
    verdicts = []
    for a in range(alphabet.M):
        for b in range(a + 1, alphabet.M):
            curve = large_array_curve(family, (a, b), cfg.nr_grid)
            verdicts.append((a, b, curve))
            rows.append(["verdict", f"{a}-{b}", f"{curve.slope:.5e}", "", "",
                         curve.verdict])
    os.makedirs(cfg.out_dir, exist_ok=True)
    _write_csv(os.path.join(cfg.out_dir, "jeffreys_vs_nr.csv"),
               ["nr", "pair", "jeffreys", "frob_stat", "sigma_min_cring", "sym_err"],
               rows)

    def plot(ax):
        for a, b, curve in verdicts:
            ax.loglog(curve.nrValues, np.maximum(curve.jValues, 1e-300),
                      marker="o", label=f"{a}-{b}: {curve.verdict}")
        ax.set_xlabel("receive antennas")
        ax.set_ylabel("Jeffreys divergence")
        ax.legend(fontsize=6)

    _best_effort_svg(os.path.join(cfg.out_dir, "jeffreys_vs_nr.svg"), plot)
    return 0


def cmd_design_codebook(cfg: ExperimentConfig) -> int:
    spec = dict(cfg.design_spec) or dict(cfg.alphabet_spec)
    dims = cfg.dims
    kind = spec.get("kind")
    seed = int(spec.get("seed", cfg.seed))
    if kind == "grassmannian":
        cb = codebooks.random_grassmannian(int(spec["M"]), dims.K, dims.Nt, seed)
        it = int(spec.get("iterations", 0))
        if it:
            cb = codebooks.refine_packing(cb, it, float(spec.get("step", 0.5)))
        log = cb.designLog
    elif kind == "union":
        cb = codebooks.subspace_union_codebook(spec["sizes"], dims.K, dims.Nt, seed)
        log = ()
    else:
        raise ConfigError(f"[design] unknown kind {kind!r}")
    report = codebooks.validate_codebook(cb)
    from .singularity import high_snr_singularity

    sing = high_snr_singularity(cb.alphabet)
    os.makedirs(cfg.out_dir, exist_ok=True)
    matio.save_matrices(os.path.join(cfg.out_dir, "codebook.txt"),
                        [c.S for c in cb.alphabet.codewords])
    with open(os.path.join(cfg.out_dir, "codebook_report.json"), "w") as fh:
        json.dump({
            "power_value": report.power_value,
            "power_ok": report.power_ok,
            "unitary_ok": report.unitary_ok,
            "unitary_max_dev": report.unitary_max_dev,
            "min_chordal": report.min_chordal,
            "ranks": list(report.ranks),
            "passed": report.passed,
            "asd_high_snr": sing.asd_high_snr,
        }, fh, indent=2)
    if log:
        _write_csv(os.path.join(cfg.out_dir, "design_log.csv"),
                   ["iteration", "min_chordal", "step", "accepted"],
                   [[it_, f"{d:.9e}", f"{s:.3e}", acc] for it_, d, s, acc in log])
    if not report.passed:
        return 2
    return 0


def cmd_validate(cfg: ExperimentConfig) -> int:
    alphabet = build_alphabet(cfg)
    report = codebooks.validate_codebook(alphabet)
    print(json.dumps({
        "power_value": report.power_value,
        "power_ok": report.power_ok,
        "min_chordal": report.min_chordal,
        "ranks": list(report.ranks),
        "passed": report.passed,
    }, indent=2))
    return 0 if report.passed else 2


_COMMANDS = {
    "check-singularity": cmd_check_singularity,
    "sweep-snr": cmd_sweep_snr,
    "sweep-nr": cmd_sweep_nr,
    "design-codebook": cmd_design_codebook,
    "validate": cmd_validate,
}


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="noncohlab",
                                 description="noncoherent detection experiments")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--threads", type=int, default=1,
                        help="worker hint; outputs are identical for any value")
        sp.add_argument("--out", default=None)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.load(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.out is not None:
            cfg.out_dir = args.out
        return _COMMANDS[args.command](cfg)
    except (ConfigError, ModelError, KeyError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
