"""End-to-end simulation: state -> teleporter -> homodyne data -> MLE -> metrics."""

from __future__ import annotations

import json
import logging
import shutil
import tempfile
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .fock_core import DensityMatrix
from .homodyne import sample_quadratures, write_dataset
from .states import (
    dark_count_mix,
    loss_channel,
    mixture_model1,
    model3_state,
    odd_cat,
    photon_subtracted_sv,
    squeezed_vacuum,
)
from .teleport import TeleporterParams, gaussian_fidelity, squeezing_db_to_r, teleport_fock
from .tomography import MleOptions, mle_reconstruct
from .wigner import PhaseSpaceGrid, wigner_from_rho

log = logging.getLogger(__name__)

INPUT_MODELS = ("model1", "model3", "cat", "photon_subtracted")
BUNDLE_FILES = ("metrics.json", "wigner_in.csv", "wigner_out.csv", "dataset_in.csv",
                "dataset_out.csv", "rho_in.json", "rho_out.json")


class ConfigError(ValueError):
    pass


@dataclass
class InputConfig:
    model: str = "model3"
    s: float = 0.28
    eta: float = 0.79
    alpha: float = 0.99
    loss: float | None = None  # extra transmittance for cat / photon_subtracted
    dark_count_ratio: float | None = None


@dataclass
class TeleporterConfig:
    enabled: bool = True
    squeezing_db: float | None = 6.9
    r: float | None = None

    def params(self) -> TeleporterParams:
        if self.r is not None:
            return TeleporterParams(self.r)
        return TeleporterParams(squeezing_db_to_r(self.squeezing_db))


@dataclass
class SamplingConfig:
    n: int = 200000
    seed: int = 1


@dataclass
class ExperimentConfig:
    input: InputConfig = field(default_factory=InputConfig)
    teleporter: TeleporterConfig = field(default_factory=TeleporterConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    mle: MleOptions = field(default_factory=MleOptions)
    grid: PhaseSpaceGrid = field(default_factory=PhaseSpaceGrid)
    output: str = "out"

    def validate(self) -> None:
        inp = self.input
        if inp.model not in INPUT_MODELS:
            raise ConfigError(f"input.model must be one of {INPUT_MODELS}, got {inp.model!r}")
        if inp.model in ("model1", "model3") and not 0 <= inp.eta <= 1:
            raise ConfigError("input.eta must lie in [0, 1]")
        if inp.loss is not None and not 0 <= inp.loss <= 1:
            raise ConfigError("input.loss must lie in [0, 1]")
        if inp.dark_count_ratio is not None and inp.dark_count_ratio < 0:
            raise ConfigError("input.dark_count_ratio must be >= 0")
        tp = self.teleporter
        if tp.enabled and (tp.r is None) == (tp.squeezing_db is None):
            raise ConfigError("teleporter needs exactly one of r or squeezing_db")
        if self.sampling.n < 1000:
            raise ConfigError("sampling.n must be >= 1000 for reconstruction")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mle"]["x_range"] = list(self.mle.x_range)
        return d


def _section(cls, data: Any, name: str):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {sorted(unknown)}")
    if cls is MleOptions and "x_range" in data:
        data = dict(data, x_range=tuple(data["x_range"]))
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {name!r} section: {exc}") from exc


def config_from_dict(doc: dict | None) -> ExperimentConfig:
    doc = doc or {}
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(doc) - {"input", "teleporter", "sampling", "mle", "grid", "output"}
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    cfg = ExperimentConfig(
        input=_section(InputConfig, doc.get("input"), "input"),
        teleporter=_section(TeleporterConfig, doc.get("teleporter"), "teleporter"),
        sampling=_section(SamplingConfig, doc.get("sampling"), "sampling"),
        mle=_section(MleOptions, doc.get("mle"), "mle"),
        grid=_section(PhaseSpaceGrid, doc.get("grid"), "grid"),
        output=str(doc.get("output", "out")),
    )
    cfg.validate()
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        doc = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(doc)


def build_input_state(cfg: InputConfig, n_max: int) -> DensityMatrix:
    if cfg.model == "model1":
        rho = mixture_model1(cfg.eta, n_max)
        background = DensityMatrix.fock(0, n_max)
    elif cfg.model == "model3":
        rho = model3_state(cfg.s, cfg.eta, n_max)
        background = loss_channel(squeezed_vacuum(cfg.s, n_max).dm(), cfg.eta)
    elif cfg.model == "cat":
        rho = odd_cat(cfg.alpha, n_max).dm()
        background = DensityMatrix.fock(0, n_max)
    else:
        rho = photon_subtracted_sv(cfg.s, n_max).dm()
        background = squeezed_vacuum(cfg.s, n_max).dm()
    if cfg.loss is not None and cfg.model in ("cat", "photon_subtracted"):
        rho = loss_channel(rho, cfg.loss)
        background = loss_channel(background, cfg.loss)
    if cfg.dark_count_ratio is not None:
        # a dark count heralds the unsubtracted background state
        rho = dark_count_mix(rho, background, cfg.dark_count_ratio)
    return rho


def _opt_float(v):
    return None if v is None else float(v)


def run_pipeline(cfg: ExperimentConfig, out_dir=None) -> dict:
    """Run the full simulation and write the output bundle; returns the metrics."""
    cfg.validate()
    out = Path(out_dir if out_dir is not None else cfg.output)
    n_max = cfg.mle.n_max

    rho_in = build_input_state(cfg.input, n_max)
    if cfg.teleporter.enabled:
        params = cfg.teleporter.params()
        rho_out = teleport_fock(rho_in, params)
        f_tele = gaussian_fidelity(params.r)
    else:
        rho_out, f_tele = rho_in, None

    seed_in, seed_out = (int(s) for s in np.random.SeedSequence(cfg.sampling.seed).generate_state(2))
    data_in = sample_quadratures(rho_in, cfg.sampling.n, seed_in, source="input")
    data_out = sample_quadratures(rho_out, cfg.sampling.n, seed_out, source="output")
    rep_in = mle_reconstruct(data_in, cfg.mle)
    rep_out = mle_reconstruct(data_out, cfg.mle)
    m_in, m_out = rep_in.metrics(), rep_out.metrics()

    metrics = {
        "w00_in": m_in["w00"],
        "w00_out": m_out["w00"],
        "f_cat_in": m_in["f_cat"],
        "f_cat_out": m_out["f_cat"],
        "alpha_star_in": m_in["alpha_star"],
        "alpha_star_out": m_out["alpha_star"],
        "mean_photon_in": m_in["mean_photon"],
        "mean_photon_out": m_out["mean_photon"],
        "f_tele": _opt_float(f_tele),
        "model": {
            "w00_in": rho_in.parity / np.pi,
            "w00_out": rho_out.parity / np.pi,
            "mean_photon_in": rho_in.mean_photon,
            "mean_photon_out": rho_out.mean_photon,
        },
        "config": cfg.to_dict(),
    }

    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=".cvtele-", dir=out.parent))
    try:
        write_dataset(data_in, tmp / "dataset_in.csv")
        write_dataset(data_out, tmp / "dataset_out.csv")
        rep_in.rho.save(tmp / "rho_in.json", metrics=m_in, converged=rep_in.converged)
        rep_out.rho.save(tmp / "rho_out.json", metrics=m_out, converged=rep_out.converged)
        wigner_from_rho(rep_in.rho, cfg.grid, check=False).save_csv(tmp / "wigner_in.csv")
        wigner_from_rho(rep_out.rho, cfg.grid, check=False).save_csv(tmp / "wigner_out.csv")
        (tmp / "metrics.json").write_text(json.dumps(metrics, indent=2, sort_keys=True))
        out.mkdir(parents=True, exist_ok=True)
        for f in tmp.iterdir():
            shutil.move(str(f), str(out / f.name))
    finally:
        shutil.rmtree(tmp, ignore_errors=True)
    log.info("wrote bundle to %s", out)
    return metrics


EXAMPLE_CONFIG = """\
# Lossy photon-subtracted squeezed vacuum teleported with 6.9 dB of EPR squeezing.
input:
  model: model3          # model1 | model3 | cat | photon_subtracted
  s: 0.28                # squeezing parameter (model3, photon_subtracted)
  eta: 0.79              # transmittance / mixture weight (model1, model3)
  alpha: 0.99            # cat amplitude (cat)
  loss: null             # extra transmittance applied to cat / photon_subtracted
  dark_count_ratio: null # e.g. 66 mixes in the heralding background
teleporter:
  enabled: true
  squeezing_db: 6.9      # or give r directly and set this to null
  r: null
sampling:
  n: 200000
  seed: 1
mle:
  n_max: 15
  max_iters: 500
  loglik_tol: 1.0e-9
  n_theta_bins: 36
  n_x_bins: 161
  x_range: [-6.0, 6.0]
  exact: false
grid:
  x_min: -5.0
  x_max: 5.0
  p_min: -5.0
  p_max: 5.0
  nx: 201
  np: 201
output: out
"""
