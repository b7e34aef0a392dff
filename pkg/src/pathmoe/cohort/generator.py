"""Synthetic cohort generation with known latent hepatic and tumor factors.

The generative model, which is the package's verification oracle:

  - liver_factor, tumor_factor, neutral_context ~ iid standard normal.
  - Scalar summaries f = liver_factor[0], g = tumor_factor[0] (affine in the
    first coordinate, so a linear Cox model is well-specified).
  - True log hazard eta = beta_liver * f + beta_tumor * g. Patients who are
    treated and have f below zero get their hazard multiplied by
    treatment_effect_liver_lowrisk (the "liver low-risk benefits from
    treatment" structure, planted as ground truth).
  - Survival time by inverse transform from Exponential(baseline_hazard *
    exp(eta) * effect); censoring time independent Exponential(censoring_rate);
    event observed iff survival < censoring.
  - Biomarker labels are deterministic functions of single latent axes:
    palbi_class from liver_factor only (tertiles of f), bilobar and
    immunoscore_class from tumor_factor only.

Latents and survival are drawn from streams separate from rendering, so
survival outcomes are invariant to how (or whether) images are rendered.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, NamedTuple

import numpy as np
from scipy.special import ndtri

from ..errors import ConfigurationError
from ..nn.params import spawn_rng
from .anatomy import N_SLICES, SyntheticStudy, render_image_tokens
from .reports import ReportSegments, render_report

LOW_LIVER_THRESHOLD = 0.0  # f below this is "liver low-risk" for treatment effect

_TERTILES = ndtri([1.0 / 3.0, 2.0 / 3.0])
_QUARTILES = ndtri([0.25, 0.5, 0.75])


@dataclass
class CohortConfig:
    n_patients: int = 588
    beta_liver: float = 0.8
    beta_tumor: float = 0.6
    baseline_hazard: float = 0.03      # events per month
    censoring_rate: float = 0.015      # censorings per month
    treatment_effect_liver_lowrisk: float = 0.4
    noise_std: float = 0.1
    seed: int = 0
    cross_leak: float = 0.0
    d_latent: int = 4
    n_slices: int = N_SLICES

    def validate(self) -> "CohortConfig":
        if self.n_patients <= 0:
            raise ConfigurationError(f"n_patients must be positive, got {self.n_patients}")
        if self.baseline_hazard <= 0.0:
            raise ConfigurationError("baseline_hazard must be positive")
        if self.censoring_rate < 0.0:
            raise ConfigurationError("censoring_rate must be >= 0")
        if self.treatment_effect_liver_lowrisk <= 0.0:
            raise ConfigurationError("treatment effect must be a positive hazard ratio")
        if self.noise_std < 0.0:
            raise ConfigurationError("noise_std must be >= 0")
        return self


@dataclass
class LatentPatient:
    patient_id: int
    liver_factor: np.ndarray
    tumor_factor: np.ndarray
    neutral_context: np.ndarray

    @property
    def f_liver(self) -> float:
        return float(self.liver_factor[0])

    @property
    def g_tumor(self) -> float:
        return float(self.tumor_factor[0])


@dataclass
class SurvivalRecord:
    time_months: float
    event: bool
    treated: bool
    palbi_class: int        # from liver_factor only
    bilobar: bool           # from tumor_factor only
    immunoscore_class: int  # from tumor_factor only
    log_hazard: float       # true eta, for oracle analyses


class PatientData(NamedTuple):
    latent: LatentPatient
    study: SyntheticStudy
    report: ReportSegments
    survival: SurvivalRecord


Cohort = List[PatientData]


def liver_summary(liver_factor: np.ndarray) -> float:
    return float(liver_factor[0])


def tumor_summary(tumor_factor: np.ndarray) -> float:
    return float(tumor_factor[0])


def palbi_class_of(liver_factor: np.ndarray) -> int:
    return int(np.searchsorted(_TERTILES, liver_factor[0]))


def bilobar_of(tumor_factor: np.ndarray) -> bool:
    return bool(tumor_factor[0] > 0.0)


def immunoscore_class_of(tumor_factor: np.ndarray) -> int:
    return int(np.searchsorted(_QUARTILES, tumor_factor[1]))


def true_log_hazard(cfg: CohortConfig, liver_factor: np.ndarray,
                    tumor_factor: np.ndarray) -> float:
    return cfg.beta_liver * liver_summary(liver_factor) + cfg.beta_tumor * tumor_summary(tumor_factor)


def _inverse_transform_exponential(u: float, rate: float) -> float:
    # u in [0, 1); guard the measure-zero u = 0 draw so times stay positive
    return max(-np.log1p(-u) / rate, 1e-12)


def generate_cohort(cfg: CohortConfig) -> Cohort:
    """Draw a full cohort. Byte-reproducible for a given config."""
    cfg.validate()
    n = cfg.n_patients
    d = cfg.d_latent

    latent_rng = spawn_rng(cfg.seed, "latents")
    liver = latent_rng.normal(0.0, 1.0, size=(n, d))
    tumor = latent_rng.normal(0.0, 1.0, size=(n, d))
    neutral = latent_rng.normal(0.0, 1.0, size=(n, d))

    surv_rng = spawn_rng(cfg.seed, "survival")
    treated = surv_rng.random(n) < 0.5
    u_event = surv_rng.random(n)
    u_cens = surv_rng.random(n)

    render_rng = spawn_rng(cfg.seed, "render")

    cohort: Cohort = []
    for i in range(n):
        eta = true_log_hazard(cfg, liver[i], tumor[i])
        rate = cfg.baseline_hazard * np.exp(eta)
        if treated[i] and liver_summary(liver[i]) < LOW_LIVER_THRESHOLD:
            rate *= cfg.treatment_effect_liver_lowrisk
        t_event = _inverse_transform_exponential(u_event[i], rate)
        if cfg.censoring_rate > 0.0:
            t_cens = _inverse_transform_exponential(u_cens[i], cfg.censoring_rate)
        else:
            t_cens = np.inf
        event = bool(t_event < t_cens)

        latent = LatentPatient(patient_id=i, liver_factor=liver[i],
                               tumor_factor=tumor[i], neutral_context=neutral[i])
        study = render_image_tokens(liver[i], tumor[i], cfg.noise_std, render_rng,
                                    cross_leak=cfg.cross_leak, n_slices=cfg.n_slices)
        report = render_report(liver[i], tumor[i], neutral[i])
        survival = SurvivalRecord(
            time_months=float(min(t_event, t_cens)),
            event=event,
            treated=bool(treated[i]),
            palbi_class=palbi_class_of(liver[i]),
            bilobar=bilobar_of(tumor[i]),
            immunoscore_class=immunoscore_class_of(tumor[i]),
            log_hazard=float(eta),
        )
        cohort.append(PatientData(latent, study, report, survival))
    return cohort


def split_indices(n: int, n_train: int, seed: int):
    """Deterministic train/test partition: seeded shuffle, first n_train train."""
    if n_train > n:
        raise ConfigurationError(f"train size {n_train} exceeds cohort size {n}")
    order = spawn_rng(seed, "split").permutation(n)
    return np.sort(order[:n_train]), np.sort(order[n_train:])


def cohort_arrays(cohort: Cohort) -> dict:
    """Column-wise view of the survival records for metric code."""
    return {
        "patient_id": np.array([p.latent.patient_id for p in cohort]),
        "time_months": np.array([p.survival.time_months for p in cohort]),
        "event": np.array([p.survival.event for p in cohort], dtype=bool),
        "treated": np.array([p.survival.treated for p in cohort], dtype=bool),
        "palbi_class": np.array([p.survival.palbi_class for p in cohort]),
        "bilobar": np.array([p.survival.bilobar for p in cohort], dtype=bool),
        "immunoscore_class": np.array([p.survival.immunoscore_class for p in cohort]),
        "log_hazard": np.array([p.survival.log_hazard for p in cohort]),
        "f_liver": np.array([p.latent.f_liver for p in cohort]),
        "g_tumor": np.array([p.latent.g_tumor for p in cohort]),
    }
