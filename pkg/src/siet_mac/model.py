"""Channel configuration, SNRs and the harvester energy-rate surface.

Energy rates are normalized by the harvester noise power, so the noise alone
contributes one unit per channel use.  With per-user power splits ``beta``
(fraction of the budget spent on information-carrying symbols) the largest
energy rate the harvester can see is::

    E(beta) = 1 + sum_j beta_j snr2_j + (sum_j sqrt((1 - beta_j) snr2_j))**2

which runs from ``b_coop`` (all power on the shared energy beam, beta = 0)
down to ``b_ind`` (independent inputs, beta = 1).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from os import PathLike
from typing import Any, Mapping, Sequence

import numpy as np

from . import errors
from .kernels import energy_max_batch

DEFAULT_TOL = 1e-9


def slack(value: float, tol: float = DEFAULT_TOL) -> float:
    """Comparison slack for a quantity of magnitude ``value``."""
    return tol * max(1.0, abs(value))


def _vector(x, name: str) -> np.ndarray:
    arr = np.array(x, dtype=float)
    if arr.ndim != 1:
        raise errors.BadDimension(f"{name} must be a vector, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ChannelConfig:
    """Gains, noise variances and power budgets of the K-user channel."""

    k: int
    h1: np.ndarray
    h2: np.ndarray
    p_max: np.ndarray
    sigma1_sq: float = 1.0
    sigma2_sq: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "h1", _vector(self.h1, "h1"))
        object.__setattr__(self, "h2", _vector(self.h2, "h2"))
        object.__setattr__(self, "p_max", _vector(self.p_max, "p_max"))
        object.__setattr__(self, "sigma1_sq", float(self.sigma1_sq))
        object.__setattr__(self, "sigma2_sq", float(self.sigma2_sq))

    @classmethod
    def from_snr(cls, snr1, snr2) -> "ChannelConfig":
        """Unit-noise configuration whose SNRs equal the given ones.

        The budget of user i is ``K * max(snr1_i, snr2_i)`` so that every gain
        satisfies ``h_ji**2 <= 1/K`` and both norm conditions hold.
        """
        snr1 = np.asarray(snr1, dtype=float)
        snr2 = np.asarray(snr2, dtype=float)
        if snr1.shape != snr2.shape or snr1.ndim != 1:
            raise errors.BadDimension("snr1 and snr2 must be vectors of equal length")
        if np.any(snr1 < 0) or np.any(snr2 < 0):
            raise errors.NegativePower("SNR entries must be non-negative")
        k = snr1.size
        p = k * np.maximum(snr1, snr2)
        with np.errstate(invalid="ignore", divide="ignore"):
            h1 = np.where(p > 0, np.sqrt(snr1 / p), 0.0)
            h2 = np.where(p > 0, np.sqrt(snr2 / p), 0.0)
        return cls(k=k, h1=h1, h2=h2, p_max=p)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "h1": self.h1.tolist(),
            "h2": self.h2.tolist(),
            "sigma1_sq": self.sigma1_sq,
            "sigma2_sq": self.sigma2_sq,
            "p_max": self.p_max.tolist(),
        }


@dataclass(frozen=True)
class SnrTable:
    """Per-user SNRs at the receiver (``snr1``) and at the harvester (``snr2``)."""

    snr1: np.ndarray
    snr2: np.ndarray

    def __post_init__(self):
        s1 = _vector(self.snr1, "snr1")
        s2 = _vector(self.snr2, "snr2")
        if s1.shape != s2.shape:
            raise errors.BadDimension(
                f"snr1 has {s1.size} entries but snr2 has {s2.size}"
            )
        if np.any(s1 < 0) or np.any(s2 < 0) or not (
            np.all(np.isfinite(s1)) and np.all(np.isfinite(s2))
        ):
            raise errors.NegativePower("SNR entries must be finite and non-negative")
        object.__setattr__(self, "snr1", s1)
        object.__setattr__(self, "snr2", s2)

    @property
    def k(self) -> int:
        return self.snr1.size

    @classmethod
    def symmetric(cls, k: int, value: float) -> "SnrTable":
        return cls(np.full(k, float(value)), np.full(k, float(value)))

    def to_dict(self) -> dict:
        return {"snr1": self.snr1.tolist(), "snr2": self.snr2.tolist()}


def validate_config(cfg: ChannelConfig) -> ChannelConfig:
    """Return ``cfg`` unchanged if it describes a legal channel, else raise."""
    if int(cfg.k) != cfg.k or cfg.k < 2:
        raise errors.KTooSmall(f"need at least two users, got K={cfg.k}")
    for name in ("h1", "h2", "p_max"):
        vec = getattr(cfg, name)
        if vec.size != cfg.k:
            raise errors.BadDimension(f"{name} has {vec.size} entries, expected {cfg.k}")
        if not np.all(np.isfinite(vec)):
            raise errors.ConfigError(f"{name} contains non-finite entries")
    if np.any(cfg.h1 < 0) or np.any(cfg.h2 < 0):
        raise errors.ConfigError("channel gains must be non-negative")
    for name in ("h1", "h2"):
        norm_sq = float(np.sum(getattr(cfg, name) ** 2))
        if norm_sq > 1.0 + DEFAULT_TOL:
            raise errors.NormViolation(f"||{name}||^2 = {norm_sq:.12g} exceeds 1")
    for name in ("sigma1_sq", "sigma2_sq"):
        var = getattr(cfg, name)
        if not (var > 0 and math.isfinite(var)):
            raise errors.NonPositiveVariance(f"{name} must be positive, got {var}")
    if np.any(cfg.p_max < 0):
        raise errors.NegativePower("power budgets must be non-negative")
    return cfg


def snr_table(cfg: ChannelConfig) -> SnrTable:
    return SnrTable(
        cfg.h1**2 * cfg.p_max / cfg.sigma1_sq,
        cfg.h2**2 * cfg.p_max / cfg.sigma2_sq,
    )


def power_split(beta, k: int | None = None, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Validate a power split and return it as a read-only float vector.

    Entries within ``tol`` outside [0, 1] are clipped; anything further out
    raises ``ValueError``.
    """
    arr = np.array(beta, dtype=float).reshape(-1)
    if k is not None and arr.size != k:
        raise errors.BadDimension(f"power split has {arr.size} entries, expected {k}")
    if not np.all(np.isfinite(arr)) or np.any(arr < -tol) or np.any(arr > 1 + tol):
        raise ValueError(f"power split entries must lie in [0, 1], got {arr.tolist()}")
    arr = np.clip(arr, 0.0, 1.0)
    arr.setflags(write=False)
    return arr


def b_ind(snr: SnrTable) -> float:
    # through the kernel so that E(1, ..., 1) == b_ind holds bit for bit
    return energy_max(snr, np.ones(snr.k))


def b_coop(snr: SnrTable) -> float:
    return energy_max(snr, np.zeros(snr.k))


def energy_max(snr: SnrTable, beta) -> float:
    """Largest harvester energy rate reachable with power split ``beta``."""
    beta = power_split(beta, snr.k)
    return float(energy_max_batch(beta[None, :], snr.snr2)[0])


def energy_max_many(snr: SnrTable, betas) -> np.ndarray:
    """Vectorized :func:`energy_max` over the rows of ``betas``."""
    betas = np.clip(np.atleast_2d(np.asarray(betas, dtype=float)), 0.0, 1.0)
    return energy_max_batch(np.ascontiguousarray(betas), snr.snr2)


def is_feasible(b: float, snr: SnrTable, tol: float = DEFAULT_TOL) -> bool:
    """Whether the energy demand ``b`` can be met at all (``0 <= b <= b_coop``)."""
    if b < 0:
        raise errors.NegativeDemand(f"energy demand must be non-negative, got {b}")
    top = b_coop(snr)
    return b <= top + slack(top, tol)


def regime(b: float, snr: SnrTable, tol: float = DEFAULT_TOL) -> str:
    """Classify a demand: ``"vacuous"``, ``"binding"`` or ``"infeasible"``."""
    if not is_feasible(b, snr, tol):
        return "infeasible"
    low = b_ind(snr)
    return "vacuous" if b <= low + slack(low, tol) else "binding"


def check_demand(b: float, snr: SnrTable, tol: float = DEFAULT_TOL) -> None:
    if not is_feasible(b, snr, tol):
        raise errors.InfeasibleDemand(
            f"energy demand b={b:.12g} exceeds b_coop={b_coop(snr):.12g}"
        )


def config_from_dict(doc: Mapping[str, Any]) -> tuple[SnrTable, ChannelConfig]:
    """Parse a JSON config document.

    Two layouts are accepted: the physical one (``k``, ``h1``, ``h2``,
    ``sigma1_sq``, ``sigma2_sq``, ``p_max``) and the direct-SNR one (``snr1``,
    ``snr2``).  The SNR table is returned exactly as given in the second case;
    the accompanying :class:`ChannelConfig` is an equivalent unit-noise channel
    used by the signal-level simulator.
    """
    if "snr1" in doc or "snr2" in doc:
        try:
            snr = SnrTable(doc["snr1"], doc["snr2"])
        except KeyError as exc:
            raise errors.ConfigError(f"direct-SNR config is missing {exc}") from None
        if "k" in doc and int(doc["k"]) != snr.k:
            raise errors.BadDimension(f"k={doc['k']} but {snr.k} SNR entries given")
        if snr.k < 2:
            raise errors.KTooSmall(f"need at least two users, got K={snr.k}")
        return snr, validate_config(ChannelConfig.from_snr(snr.snr1, snr.snr2))
    missing = [f for f in ("k", "h1", "h2", "p_max") if f not in doc]
    if missing:
        raise errors.ConfigError(f"config is missing fields {missing}")
    cfg = ChannelConfig(
        k=doc["k"],
        h1=doc["h1"],
        h2=doc["h2"],
        p_max=doc["p_max"],
        sigma1_sq=doc.get("sigma1_sq", 1.0),
        sigma2_sq=doc.get("sigma2_sq", 1.0),
    )
    validate_config(cfg)
    return snr_table(cfg), cfg


def load_config(path: str | PathLike) -> tuple[SnrTable, ChannelConfig]:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise errors.ConfigError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise errors.ConfigError(f"{path}: expected a JSON object")
    return config_from_dict(doc)


def parse_snr_option(text: str) -> tuple[SnrTable, ChannelConfig]:
    """Parse the CLI form ``"snr1_1,...,snr1_K;snr2_1,...,snr2_K"``.

    A single list is used for both sides.
    """
    parts = [p for p in text.split(";")]
    try:
        lists: Sequence[list[float]] = [
            [float(v) for v in part.split(",") if v.strip()] for part in parts
        ]
    except ValueError as exc:
        raise errors.ConfigError(f"cannot parse SNR list {text!r}: {exc}") from None
    if len(lists) == 1:
        lists = [lists[0], lists[0]]
    if len(lists) != 2:
        raise errors.ConfigError("expected 'snr1;snr2' with two comma-separated lists")
    return config_from_dict({"snr1": lists[0], "snr2": lists[1]})
