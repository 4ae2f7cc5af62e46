"""Signal-level Monte Carlo of the energy leg of the power-split inputs.

Transmitter i sends ``X_i = sqrt((1 - beta_i) P_i) W + U_i``: a shared
standard Gaussian energy beam ``W`` (common randomness, one stream per block)
plus its own Gaussian information symbols ``U_i`` of variance ``beta_i P_i``.
The harvester sees ``Y_2 = sum_i h2_i X_i + Q`` and the block energy rate is
``mean(Y_2**2) / sigma2_sq``.  Only the harvester output is simulated, so the
receiver noise is never drawn and its joint law with ``Q`` does not matter.

Randomness: block ``t`` of seed ``s`` uses ``SeedSequence(s, spawn_key=(t,))``
and spawns one child stream each for ``W``, ``Q`` and every user's ``U_i``.
Results are therefore fixed by the seed, whatever the execution order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernels import harvested_energy
from .model import ChannelConfig, energy_max, power_split, snr_table, validate_config


@dataclass(frozen=True)
class SimulationConfig:
    split: np.ndarray
    n: int = 100_000
    trials: int = 50
    epsilon: float | None = None
    seed: int = 0
    target_B: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "split", power_split(self.split))
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"blocklength must be a positive integer, got {self.n}")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError(f"trials must be a positive integer, got {self.trials}")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed}")


@dataclass
class SimulationResult:
    empirical_B: np.ndarray
    outage_rate: float
    mean_B: float
    var_B: float
    target_B: float
    epsilon: float
    expected_B: float
    extra: dict = field(default_factory=dict)

    def to_dict(self, per_trial: bool = False) -> dict:
        out = {
            "mean_B": self.mean_B,
            "var_B": self.var_B,
            "outage_rate": self.outage_rate,
            "target_B": self.target_B,
            "epsilon": self.epsilon,
            "expected_B": self.expected_B,
        }
        if per_trial:
            out["per_trial"] = self.empirical_B.tolist()
        return out


def _streams(seed: int, trial: int, k: int):
    children = np.random.SeedSequence(seed, spawn_key=(trial,)).spawn(k + 2)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def _draw(cfg: ChannelConfig, n: int, seed: int, trial: int):
    streams = _streams(seed, trial, cfg.k)
    w = streams[0].standard_normal(n)
    g = streams[1].standard_normal(n)
    v = np.empty((cfg.k, n))
    for i in range(cfg.k):
        v[i] = streams[2 + i].standard_normal(n)
    return w, v, g


def simulate_energy(cfg: ChannelConfig, sim: SimulationConfig) -> SimulationResult:
    """Empirical energy rates and energy-outage frequency over ``sim.trials`` blocks."""
    validate_config(cfg)
    beta = power_split(sim.split, cfg.k)
    expected = energy_max(snr_table(cfg), beta)
    target = expected if sim.target_B is None else float(sim.target_B)
    eps = 0.01 * target if sim.epsilon is None else float(sim.epsilon)

    coef_w = np.ascontiguousarray(cfg.h2 * np.sqrt((1.0 - beta) * cfg.p_max))
    coef_v = np.ascontiguousarray(cfg.h2 * np.sqrt(beta * cfg.p_max))
    sigma = float(np.sqrt(cfg.sigma2_sq))

    values = np.empty(sim.trials)
    for t in range(sim.trials):
        w, v, g = _draw(cfg, sim.n, sim.seed, t)
        values[t] = harvested_energy(w, v, g, coef_w, coef_v, sigma)

    return SimulationResult(
        empirical_B=values,
        outage_rate=float(np.mean(values < target - eps)),
        mean_B=float(values.mean()),
        var_B=float(values.var(ddof=1)) if sim.trials > 1 else 0.0,
        target_B=target,
        epsilon=eps,
        expected_B=expected,
    )


def channel_inputs(cfg: ChannelConfig, sim: SimulationConfig, trial: int = 0) -> np.ndarray:
    """The K input sequences of one block, shape (K, n)."""
    beta = power_split(sim.split, cfg.k)
    w, v, _ = _draw(cfg, sim.n, sim.seed, trial)
    common = np.sqrt((1.0 - beta) * cfg.p_max)[:, None] * w[None, :]
    return common + np.sqrt(beta * cfg.p_max)[:, None] * v


def empirical_correlation(cfg: ChannelConfig, sim: SimulationConfig) -> np.ndarray:
    """Sample Pearson correlation matrix of the inputs of the first block.

    Users with zero budget have no defined correlation; their entries are NaN.
    """
    validate_config(cfg)
    x = channel_inputs(cfg, sim)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.corrcoef(x)


def expected_correlation(beta) -> np.ndarray:
    """Input correlation implied by the power split: ``sqrt((1-b_i)(1-b_j))`` off the diagonal."""
    beta = power_split(beta)
    z = np.sqrt(1.0 - beta)
    lam = np.outer(z, z)
    np.fill_diagonal(lam, 1.0)
    return lam
