"""Centralized information-energy capacity region and the BSC trade-off curve.

A rate tuple ``(R_1, ..., R_K, B)`` lies in the capacity region for demand
``b`` when some power split ``beta`` in [0, 1]^K satisfies, for every
non-empty user subset U,

    sum_{j in U} R_j <= 0.5 * log2(1 + sum_{j in U} beta_j snr1_j)

together with ``b <= B <= E(beta)``.  The rate constraints are linear in
``beta * snr1`` once exponentiated and ``E`` is concave, so the search is a
convex feasibility problem; it is still settled numerically, with an explicit
witness ``beta`` for every positive answer.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple

import numpy as np
from scipy.optimize import minimize

from . import errors
from .kernels import capacity_violation_batch, energy_max_batch, sic_rates_batch
from .model import (
    DEFAULT_TOL,
    SnrTable,
    b_coop,
    check_demand,
    energy_max,
    energy_max_many,
    power_split,
    slack,
)

#: grid points per beta axis used by :func:`capacity_witness`
DEFAULT_GRID = {2: 64, 3: 16}


@dataclass(frozen=True)
class RateTuple:
    """Information rates (bits per channel use) and energy rate."""

    r: np.ndarray
    b_rate: float

    def __post_init__(self):
        r = np.array(self.r, dtype=float).reshape(-1)
        if not np.all(np.isfinite(r)) or np.any(r < 0):
            raise ValueError(f"information rates must be finite and >= 0, got {r.tolist()}")
        b_rate = float(self.b_rate)
        if not (b_rate >= 0 and math.isfinite(b_rate)):
            raise ValueError(f"energy rate must be finite and >= 0, got {b_rate}")
        r.setflags(write=False)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "b_rate", b_rate)

    @property
    def k(self) -> int:
        return self.r.size

    def as_array(self) -> np.ndarray:
        return np.append(self.r, self.b_rate)


@dataclass(frozen=True)
class BscParams:
    p: float
    b: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 0.5:
            raise errors.OutOfRange(f"crossover probability must lie in [0, 1/2], got {self.p}")
        if not 0.0 <= self.b <= 1.0 - self.p:
            raise errors.OutOfRange(
                f"energy demand must lie in [0, 1 - p] = [0, {1.0 - self.p}], got {self.b}"
            )


class BoundaryPoint(NamedTuple):
    beta: np.ndarray
    point: RateTuple


@lru_cache(maxsize=None)
def subset_masks(k: int) -> np.ndarray:
    """All 2**k - 1 non-empty user subsets as rows of a 0/1 matrix."""
    codes = np.arange(1, 2**k)
    masks = ((codes[:, None] >> np.arange(k)[None, :]) & 1).astype(float)
    masks.setflags(write=False)
    return masks


def sum_rate_bound(snr: SnrTable, beta, subset: Iterable[int]) -> float:
    """Sum-rate limit of the users in ``subset`` (0-based indices)."""
    users = sorted(set(int(u) for u in subset))
    if not users:
        raise errors.EmptySubset("subset must contain at least one user")
    if users[0] < 0 or users[-1] >= snr.k:
        raise IndexError(f"user indices must lie in [0, {snr.k - 1}], got {users}")
    beta = power_split(beta, snr.k)
    return 0.5 * math.log2(1.0 + float(np.sum(beta[users] * snr.snr1[users])))


def _grid_size(k: int) -> int:
    return DEFAULT_GRID.get(k, max(3, int(20000 ** (1.0 / k))))


def decoding_orders(k: int, limit: int = 720):
    if math.factorial(k) <= limit:
        return [np.array(p, dtype=np.intp) for p in itertools.permutations(range(k))]
    rng = np.random.default_rng(k)
    return [np.arange(k, dtype=np.intp)] + [rng.permutation(k) for _ in range(limit - 1)]


def _greedy_vertices(snr: SnrTable, rates: np.ndarray) -> np.ndarray:
    """Minimal power splits carrying ``rates`` under successive decoding.

    For each decoding order the required received powers are peeled off from
    the last decoded user backwards.  Users with no receiver SNR get beta = 0,
    which only helps the energy constraint.
    """
    k = snr.k
    rows = []
    gains = np.power(2.0, 2.0 * rates) - 1.0
    for order in decoding_orders(k):
        x = np.zeros(k)
        later = 0.0
        for u in order[::-1]:
            x[u] = gains[u] * (1.0 + later)
            later += x[u]
        with np.errstate(divide="ignore", invalid="ignore"):
            beta = np.where(snr.snr1 > 0, x / snr.snr1, 0.0)
        rows.append(beta)
    return np.clip(np.array(rows), 0.0, 1.0)


class _Problem:
    """Constraint data of one membership query."""

    def __init__(self, snr: SnrTable, pt: RateTuple, tol: float):
        self.snr = snr
        self.masks = np.ascontiguousarray(subset_masks(snr.k))
        self.sum_rates = self.masks @ pt.r
        self.rate_slack = slack(float(self.sum_rates.max()), tol)
        self.B = pt.b_rate
        self.tol = tol

    def evaluate(self, betas: np.ndarray):
        betas = np.ascontiguousarray(betas, dtype=float)
        viol = capacity_violation_batch(betas, self.snr.snr1, self.masks, self.sum_rates)
        energy = energy_max_batch(betas, self.snr.snr2)
        ok = (viol <= self.rate_slack) & (self.B <= energy + self.tol * np.maximum(1.0, energy))
        score = np.maximum(viol, (self.B - energy) / max(1.0, self.B))
        return ok, score

    def first_ok(self, betas: np.ndarray):
        ok, score = self.evaluate(betas)
        if ok.any():
            idx = np.flatnonzero(ok)
            return betas[idx[np.argmin(score[idx])]], score
        return None, score

    def refine(self, start: np.ndarray) -> np.ndarray:
        """Maximize E(beta) under the (exponentiated, linear) rate constraints."""
        s1, s2 = self.snr.snr1, self.snr.snr2
        a = np.sqrt(s2)
        A = self.masks * s1[None, :]
        c = np.power(2.0, 2.0 * self.sum_rates) - 1.0
        scale = np.maximum(1.0, c)

        def neg_energy(beta):
            z = np.clip(1.0 - beta, 0.0, None)
            root = np.sqrt(z) * a
            total = root.sum()
            val = 1.0 + beta @ s2 + total * total
            grad = -(a / np.sqrt(np.maximum(z, 1e-14))) * (total - root)
            return -val, -grad

        cons = {
            "type": "ineq",
            "fun": lambda beta: (A @ beta - c) / scale,
            "jac": lambda beta: A / scale[:, None],
        }
        res = minimize(
            neg_energy,
            np.clip(start, 0.0, 1.0),
            jac=True,
            method="SLSQP",
            bounds=[(0.0, 1.0)] * self.snr.k,
            constraints=[cons],
            options={"maxiter": 200, "ftol": 1e-15},
        )
        beta = np.clip(res.x, 0.0, 1.0)
        # nudge onto the rate-feasible side: rates only grow with beta
        short = np.maximum(0.0, (c - A @ beta) / np.maximum(A.sum(axis=1), 1e-300))
        if short.max() > 0:
            beta = np.clip(beta + short.max() * (s1 > 0), 0.0, 1.0)
        return beta


def capacity_witness(
    snr: SnrTable,
    b: float,
    pt: RateTuple,
    grid: int | None = None,
    refine: bool = True,
    tol: float = DEFAULT_TOL,
) -> np.ndarray | None:
    """Find a power split certifying that ``pt`` lies in the capacity region.

    The search tries, in order: the successive-decoding vertices of the rate
    polytope (exact for corner points), a product grid with ``grid`` points
    per axis (64 for K=2, 16 for K=3, fewer beyond), and a local SLSQP
    refinement from the best grid cells.  Returns the witness or ``None``;
    a ``None`` is only as good as the search resolution.
    """
    check_demand(b, snr, tol)
    if pt.k != snr.k:
        raise errors.BadDimension(f"rate tuple has {pt.k} users, channel has {snr.k}")
    if pt.b_rate < b - slack(b, tol):
        return None
    prob = _Problem(snr, pt, tol)

    # rate bounds grow with beta: if full power cannot carry the rates, nothing can
    ones = np.ones((1, snr.k))
    if capacity_violation_batch(ones, snr.snr1, prob.masks, prob.sum_rates)[0] > prob.rate_slack:
        return None
    if pt.b_rate > b_coop(snr) + slack(b_coop(snr), tol):
        return None

    found, _ = prob.first_ok(_greedy_vertices(snr, pt.r))
    if found is not None:
        return found

    n = grid or _grid_size(snr.k)
    axis = np.linspace(0.0, 1.0, n)
    cells = np.stack(np.meshgrid(*([axis] * snr.k), indexing="ij"), axis=-1).reshape(-1, snr.k)
    found, score = prob.first_ok(cells)
    if found is not None or not refine:
        return found

    starts = cells[np.argsort(score)[:3]]
    candidates = np.array([prob.refine(s) for s in starts])
    found, _ = prob.first_ok(candidates)
    return found


def capacity_contains(
    snr: SnrTable,
    b: float,
    pt: RateTuple,
    grid: int | None = None,
    refine: bool = True,
    tol: float = DEFAULT_TOL,
) -> bool:
    """Membership in the information-energy capacity region (see :func:`capacity_witness`)."""
    return capacity_witness(snr, b, pt, grid=grid, refine=refine, tol=tol) is not None


def witness_satisfies(snr: SnrTable, b: float, pt: RateTuple, beta, tol: float = DEFAULT_TOL) -> bool:
    """Direct re-check of every capacity constraint at ``beta``, loop by loop."""
    beta = power_split(beta, snr.k)
    for u in range(1, 2**snr.k):
        users = [j for j in range(snr.k) if u >> j & 1]
        lhs = float(sum(pt.r[j] for j in users))
        if lhs > sum_rate_bound(snr, beta, users) + slack(lhs, tol):
            return False
    top = energy_max(snr, beta)
    return b - slack(b, tol) <= pt.b_rate <= top + slack(top, tol)


def corner_rates(snr: SnrTable, beta) -> np.ndarray:
    """Successive-decoding corner points of the rate polytope at ``beta``, deduplicated."""
    beta = np.ascontiguousarray(power_split(beta, snr.k))[None, :]
    rows = [sic_rates_batch(beta, snr.snr1, order)[0] for order in decoding_orders(snr.k)]
    return np.unique(np.round(np.array(rows), 15), axis=0)


def region_boundary_samples(
    snr: SnrTable,
    b: float,
    n_samples: int,
    betas=None,
    n_energy: int = 1,
    tol: float = DEFAULT_TOL,
) -> list[BoundaryPoint]:
    """Dominant-face corner points of the capacity region, for plotting.

    ``n_samples`` grid points are taken per beta axis unless explicit
    ``betas`` are given (then ``n_samples`` only gates an empty result).  For
    each power split meeting the demand, every successive-decoding corner is
    emitted at ``n_energy`` energy levels spread over ``[b, E(beta)]``; the
    default of one level gives the top surface ``B = E(beta)``.
    """
    check_demand(b, snr, tol)
    if snr.k > 3:
        raise errors.UnsupportedK(f"boundary export supports K <= 3, got K={snr.k}")
    if n_samples <= 0:
        return []
    if betas is None:
        axis = np.linspace(0.0, 1.0, n_samples)
        betas = np.stack(np.meshgrid(*([axis] * snr.k), indexing="ij"), axis=-1).reshape(-1, snr.k)
    betas = np.atleast_2d(np.asarray(betas, dtype=float))
    tops = energy_max_many(snr, betas)
    out = []
    for beta, top in zip(betas, tops):
        if top < b - slack(b, tol):
            continue
        levels = [top] if n_energy <= 1 else np.linspace(b, top, n_energy)
        for rates in corner_rates(snr, beta):
            for level in levels:
                out.append(BoundaryPoint(power_split(beta), RateTuple(np.maximum(rates, 0.0), level)))
    return out


def binary_entropy(q: float) -> float:
    """Binary entropy in bits, with 0 log 0 = 0."""
    if q <= 0.0 or q >= 1.0:
        return 0.0
    return -q * math.log2(q) - (1.0 - q) * math.log2(1.0 - q)


def bsc_info_energy_capacity(params: BscParams) -> float:
    """Largest information rate of a BSC(p) whose symbol '1' carries one energy unit.

    Equiprobable inputs deliver half a unit per use; above that the input must
    favour '1', and at ``b = 1 - p`` (always '1') no information gets through.
    """
    p, b = params.p, params.b
    if b <= 0.5:
        return 1.0 - binary_entropy(p)
    if b >= 1.0 - p:
        return 0.0
    return max(0.0, binary_entropy(b) - binary_entropy(p))


def bsc_curve(p: float, points: int = 200) -> list[tuple[float, float]]:
    if not 0.0 <= p <= 0.5:
        raise errors.OutOfRange(f"crossover probability must lie in [0, 1/2], got {p}")
    top = 1.0 - p
    out = []
    for b in np.linspace(0.0, top, max(points, 0)):
        b = min(float(b), top)
        out.append((b, bsc_info_energy_capacity(BscParams(p, b))))
    return out
