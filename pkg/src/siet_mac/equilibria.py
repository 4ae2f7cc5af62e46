"""Decentralized operating points: eta-Nash equilibria of the power-split game.

Each transmitter picks its own information fraction ``beta_i`` to maximize its
rate while the harvester demand ``b`` must still be met jointly.  Under
single-user decoding (SUD) every user treats all others as noise; under
successive interference cancellation with order ``pi`` (SIC) user ``pi(i)``
only sees the users decoded after it.

Deviations are searched over the one-dimensional space of power splits: with
Gaussian full-power inputs and a receiver that cancels the shared energy beam,
no other kind of deviation can do better.  Own rate grows with own ``beta_i``
while ``E(beta)`` shrinks, so a user's best response is the largest split that
keeps the demand satisfied.

User indices are 0-based in this API; decoding orders read and written as
text or JSON are 1-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.stats import qmc

from . import errors
from .kernels import sic_rates_batch, sud_rates_batch
from .model import (
    DEFAULT_TOL,
    SnrTable,
    b_coop,
    b_ind,
    check_demand,
    energy_max,
    power_split,
    slack,
)
from .regions import RateTuple, decoding_orders

SUD = "sud"
SIC = "sic"
TIME_SHARE = "ts"


@dataclass(frozen=True)
class DecoderSpec:
    """Receiver decoding strategy.

    ``order`` (SIC only) lists users in decoding order, 0-based.  ``mixture``
    (time sharing only) holds ``(decoder, weight)`` pairs; an empty mixture
    means every SUD/SIC decoder, i.e. arbitrary time sharing.
    """

    kind: str
    order: tuple[int, ...] | None = None
    mixture: tuple[tuple["DecoderSpec", float], ...] = ()

    def __post_init__(self):
        if self.kind not in (SUD, SIC, TIME_SHARE):
            raise errors.UnsupportedDecoder(f"unknown decoder kind {self.kind!r}")
        if self.kind == SIC:
            if self.order is None:
                raise errors.BadPermutation("SIC decoder needs a decoding order")
            order = tuple(int(u) for u in self.order)
            if sorted(order) != list(range(len(order))):
                raise errors.BadPermutation(f"{list(self.order)} is not a permutation")
            object.__setattr__(self, "order", order)
        elif self.order is not None:
            raise errors.UnsupportedDecoder("decoding order only applies to SIC")
        if self.kind == TIME_SHARE:
            mix = tuple((d, float(w)) for d, w in self.mixture)
            if any(d.kind == TIME_SHARE for d, _ in mix):
                raise errors.UnsupportedDecoder("time-sharing mixtures cannot be nested")
            if any(w < 0 for _, w in mix):
                raise ValueError("mixture weights must be non-negative")
            if mix and abs(sum(w for _, w in mix) - 1.0) > DEFAULT_TOL:
                raise ValueError("mixture weights must sum to 1")
            object.__setattr__(self, "mixture", mix)
        elif self.mixture:
            raise errors.UnsupportedDecoder("mixture only applies to time sharing")

    @classmethod
    def sud(cls) -> "DecoderSpec":
        return cls(SUD)

    @classmethod
    def sic(cls, order: Sequence[int]) -> "DecoderSpec":
        return cls(SIC, tuple(order))

    @classmethod
    def time_share(cls, mixture=()) -> "DecoderSpec":
        return cls(TIME_SHARE, mixture=tuple(mixture))

    @classmethod
    def parse(cls, text: str) -> "DecoderSpec":
        """Parse ``sud``, ``sic:2,1`` (1-based order) or ``ts``."""
        kind, _, rest = text.strip().lower().partition(":")
        if kind == SUD and not rest:
            return cls.sud()
        if kind == TIME_SHARE and not rest:
            return cls.time_share()
        if kind == SIC:
            try:
                order = [int(v) - 1 for v in rest.split(",") if v.strip()]
            except ValueError:
                raise errors.BadPermutation(f"cannot parse decoding order {rest!r}") from None
            return cls.sic(order)
        raise errors.UnsupportedDecoder(f"cannot parse decoder {text!r}")

    @property
    def label(self) -> str:
        if self.kind == SIC:
            return "sic:" + ",".join(str(u + 1) for u in self.order)
        return self.kind

    def check_users(self, k: int) -> None:
        if self.kind == SIC and len(self.order) != k:
            raise errors.BadPermutation(f"order {self.label} does not cover {k} users")
        for d, _ in self.mixture:
            d.check_users(k)


@dataclass(frozen=True)
class GameParams:
    b: float
    eta: float

    def __post_init__(self):
        if not self.b >= 0:
            raise errors.NegativeDemand(f"energy demand must be non-negative, got {self.b}")
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")


@dataclass(frozen=True)
class EquilibriumPoint:
    split: np.ndarray
    rates: RateTuple
    decoder: DecoderSpec


@dataclass
class EtaNeReport:
    """Outcome of the deviation check, with per-user detail."""

    is_ne: bool
    gains: np.ndarray
    best_responses: np.ndarray
    reason: str = ""

    def __bool__(self) -> bool:
        return self.is_ne


@dataclass
class DynamicsResult:
    trajectory: list[np.ndarray]
    converged: bool
    rounds: int

    @property
    def terminal(self) -> np.ndarray:
        return self.trajectory[-1]


def ne_rates_sud(snr: SnrTable, beta) -> np.ndarray:
    """Rates when every user is decoded treating all others as noise."""
    beta = np.ascontiguousarray(power_split(beta, snr.k))
    return sud_rates_batch(beta[None, :], snr.snr1)[0]


def _order_array(order, k: int) -> np.ndarray:
    order = np.asarray(order, dtype=np.intp).reshape(-1)
    if order.size != k or sorted(order.tolist()) != list(range(k)):
        raise errors.BadPermutation(f"{order.tolist()} is not a permutation of {k} users")
    return order


def ne_rates_sic(snr: SnrTable, beta, order: Sequence[int]) -> np.ndarray:
    """Rates under successive cancellation; ``order[0]`` is decoded first."""
    order = _order_array(order, snr.k)
    beta = np.ascontiguousarray(power_split(beta, snr.k))
    return sic_rates_batch(beta[None, :], snr.snr1, order)[0]


def ne_rates(snr: SnrTable, beta, decoder: DecoderSpec) -> np.ndarray:
    if decoder.kind == SUD:
        return ne_rates_sud(snr, beta)
    if decoder.kind == SIC:
        return ne_rates_sic(snr, beta, decoder.order)
    if decoder.mixture:
        return sum(w * ne_rates(snr, beta, d) for d, w in decoder.mixture)
    raise errors.UnsupportedDecoder("rates of unrestricted time sharing are not a single vector")


def solve_beta_uniform(snr: SnrTable, b: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Common power split ``(t, ..., t)`` meeting the demand with equality.

    Below ``b_ind`` the demand is vacuous and everybody keeps full information
    power.  Along the uniform path ``E`` is affine in ``t``, falling from
    ``b_coop`` at 0 to ``b_ind`` at 1, so the root is explicit.
    """
    if b < 0:
        raise errors.NegativeDemand(f"energy demand must be non-negative, got {b}")
    check_demand(b, snr, tol)
    low, high = b_ind(snr), b_coop(snr)
    if b <= low or high <= low:
        return power_split(np.ones(snr.k))
    t = min(1.0, max(0.0, (high - b) / (high - low)))
    return power_split(np.full(snr.k, t))


def _path_root(snr: SnrTable, b: float, w: np.ndarray) -> np.ndarray | None:
    """Bisection for ``E(min(1, t w)) = b``; ``None`` if the path misses ``b``."""
    t_hi = 1.0 / w[w > 0].min()

    def path(t):
        return np.minimum(1.0, t * w)

    def resid(t):
        return energy_max(snr, path(t)) - b

    lo, hi = 0.0, t_hi
    f_lo, f_hi = resid(lo), resid(hi)
    if f_lo < 0 or f_hi > 0:
        return None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = resid(mid)
        if f_mid >= 0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    return path(lo) if abs(f_lo) <= abs(f_hi) else path(hi)


def solve_beta_directional(
    snr: SnrTable, b: float, weights, tol: float = DEFAULT_TOL
) -> np.ndarray:
    """Power split ``min(1, t w)`` on the demand manifold ``E(beta) = b``.

    ``weights`` must be positive; they are rescaled so the largest is 1.  Any
    point of the manifold is reached by some direction, which makes this the
    parameterization used to sample equilibrium sets.
    """
    if b < 0:
        raise errors.NegativeDemand(f"energy demand must be non-negative, got {b}")
    check_demand(b, snr, tol)
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.size != snr.k:
        raise errors.BadDimension(f"{w.size} weights for {snr.k} users")
    if not np.all(w > 0) or not np.all(np.isfinite(w)):
        raise ValueError(f"direction weights must be positive, got {w.tolist()}")
    w = w / w.max()
    if b <= b_ind(snr):
        return power_split(np.ones(snr.k))
    high = b_coop(snr)
    if b >= high - slack(high, tol):
        return power_split(np.zeros(snr.k))
    root = _path_root(snr, b, w)
    if root is None:  # only when rounding puts b a hair above b_coop
        root = np.zeros(snr.k)
    return power_split(root)


def _energy_parts(snr: SnrTable, beta: np.ndarray, i: int):
    mask = np.arange(snr.k) != i
    s = snr.snr2
    c = 1.0 + float(np.sum(beta[mask] * s[mask]))
    a = float(np.sum(np.sqrt(np.clip(1.0 - beta[mask], 0.0, None) * s[mask])))
    return c, a, float(s[i])


def best_response(
    snr: SnrTable,
    params: GameParams,
    beta,
    i: int,
    decoder: DecoderSpec | None = None,
    tol: float = DEFAULT_TOL,
) -> float:
    """Largest ``beta_i`` keeping ``E(beta) >= b`` with the other splits fixed.

    Writing ``x = sqrt(1 - beta_i)`` the energy rate is affine in ``x``::

        E = C + s + A**2 + 2 A sqrt(s) x

    with ``C = 1 + sum_{k != i} beta_k snr2_k``, ``A = sum_{k != i}
    sqrt((1 - beta_k) snr2_k)`` and ``s = snr2_i``, so the root is solved in
    closed form.  Raises :class:`NoFeasibleResponse` when even ``beta_i = 0``
    misses the demand.
    """
    if decoder is not None and decoder.kind == TIME_SHARE:
        raise errors.UnsupportedDecoder("best responses are defined for SUD and SIC only")
    beta = power_split(beta, snr.k)
    if not 0 <= i < snr.k:
        raise IndexError(f"user index {i} out of range for K={snr.k}")
    c, a, s = _energy_parts(snr, beta, i)
    base = c + s + a * a
    ceiling = base + 2.0 * a * math.sqrt(s)
    b = params.b
    if base >= b - slack(b, tol):
        return 1.0
    if ceiling < b - slack(b, tol):
        raise errors.NoFeasibleResponse(i, ceiling, b)
    x = (b - base) / (2.0 * a * math.sqrt(s))
    x = min(1.0, max(0.0, x))
    out = 1.0 - x * x
    # snap rounding residue at full cooperation
    return 0.0 if out < tol else out


def _rate_of(snr: SnrTable, beta: np.ndarray, i: int, decoder: DecoderSpec) -> float:
    return float(ne_rates(snr, beta, decoder)[i])


def check_eta_ne(
    snr: SnrTable,
    params: GameParams,
    point: EquilibriumPoint,
    tol: float = DEFAULT_TOL,
) -> EtaNeReport:
    """Unilateral-deviation check of an operating point.

    A point fails when the demand is not met at its split (energy outage),
    when its rates or energy rate are not achievable with its split, or when
    some user's best response raises its rate by more than ``eta``.
    """
    decoder = point.decoder
    if decoder.kind == TIME_SHARE:
        raise errors.UnsupportedDecoder("deviation check is defined for SUD and SIC only")
    decoder.check_users(snr.k)
    beta = power_split(point.split, snr.k)
    k = snr.k
    gains = np.full(k, np.nan)
    responses = np.full(k, np.nan)
    b = params.b
    top = energy_max(snr, beta)
    if top < b - slack(b, tol):
        return EtaNeReport(False, gains, responses, f"energy outage: E(beta)={top:.12g} < b={b:.12g}")
    if not (b - slack(b, tol) <= point.rates.b_rate <= top + slack(top, tol)):
        return EtaNeReport(
            False, gains, responses,
            f"energy rate {point.rates.b_rate:.12g} outside [b, E(beta)] = [{b:.12g}, {top:.12g}]",
        )
    achievable = ne_rates(snr, beta, decoder)
    if np.any(point.rates.r > achievable + tol * np.maximum(1.0, achievable)):
        return EtaNeReport(False, gains, responses, "rates exceed what the split can carry")
    for i in range(k):
        try:
            best = best_response(snr, params, beta, i, decoder, tol)
        except errors.NoFeasibleResponse as exc:
            return EtaNeReport(False, gains, responses, str(exc))
        responses[i] = best
        trial = beta.copy()
        trial[i] = best
        gains[i] = _rate_of(snr, trial, i, decoder) - point.rates.r[i]
    worst = int(np.argmax(gains))
    if gains[worst] > params.eta + tol:
        return EtaNeReport(
            False, gains, responses,
            f"user {worst + 1} gains {gains[worst]:.6g} bits by moving to beta={responses[worst]:.12g}",
        )
    return EtaNeReport(True, gains, responses)


def is_eta_ne(
    snr: SnrTable, params: GameParams, point: EquilibriumPoint, tol: float = DEFAULT_TOL
) -> bool:
    return check_eta_ne(snr, params, point, tol).is_ne


def equilibrium_point(
    snr: SnrTable, beta, decoder: DecoderSpec, b_rate: float | None = None
) -> EquilibriumPoint:
    """Operating point induced by ``beta``; the energy rate defaults to ``E(beta)``."""
    beta = power_split(beta, snr.k)
    rates = np.maximum(ne_rates(snr, beta, decoder), 0.0)
    level = energy_max(snr, beta) if b_rate is None else b_rate
    return EquilibriumPoint(beta, RateTuple(rates, level), decoder)


def _invert_rates(snr: SnrTable, r: np.ndarray, decoder: DecoderSpec):
    """Received information powers ``beta * snr1`` that produce exactly ``r``."""
    gamma = np.power(2.0, 2.0 * r) - 1.0
    if decoder.kind == SIC:
        x = np.zeros(snr.k)
        later = 0.0
        for u in decoder.order[::-1]:
            x[u] = gamma[u] * (1.0 + later)
            later += x[u]
        return x
    share = gamma / (1.0 + gamma)
    total = share.sum()
    if total >= 1.0:
        return None
    return share * (1.0 + total / (1.0 - total))


def _matches(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    return bool(np.all(np.abs(a - b) <= tol * np.maximum(1.0, np.abs(b))))


def _manifold_split_for(snr: SnrTable, b: float, pt: RateTuple, decoder: DecoderSpec, tol: float):
    """Power split on ``E(beta) = b`` whose rates reproduce ``pt.r``, or ``None``."""
    x = _invert_rates(snr, pt.r, decoder)
    if x is None:
        return None
    s1 = snr.snr1
    free = s1 <= 0
    if np.any(pt.r[free] > tol):
        return None
    beta = np.where(free, 0.0, x / np.where(free, 1.0, s1))
    if np.any(beta > 1.0 + tol):
        return None
    beta = np.clip(beta, 0.0, 1.0)
    if free.any():
        # users nobody can hear decide only the energy: push them up the path
        w = free.astype(float)
        lo = energy_max(snr, beta)
        hi_beta = np.where(free, 1.0, beta)
        if energy_max(snr, hi_beta) > b + slack(b, tol) or lo < b - slack(b, tol):
            return None
        lo_t, hi_t = 0.0, 1.0
        for _ in range(200):
            mid = 0.5 * (lo_t + hi_t)
            if energy_max(snr, np.where(free, mid * w, beta)) >= b:
                lo_t = mid
            else:
                hi_t = mid
        beta = np.where(free, lo_t, beta)
    if abs(energy_max(snr, beta) - b) <= slack(b, tol):
        return beta
    # rounding in the rates: slide along the same direction onto the manifold
    if beta.max() <= 0:
        return None
    root = _path_root(snr, b, beta / beta.max())
    if root is None:
        return None
    if _matches(ne_rates(snr, root, decoder), pt.r, tol):
        return root
    return None


def ne_split_for(
    snr: SnrTable, params: GameParams, pt: RateTuple, decoder: DecoderSpec, tol: float = DEFAULT_TOL
) -> np.ndarray | None:
    """Equilibrium power split supporting ``pt`` under a SUD or SIC receiver."""
    check_demand(params.b, snr, tol)
    if decoder.kind == TIME_SHARE:
        raise errors.UnsupportedDecoder("use ne_region_contains for time sharing")
    decoder.check_users(snr.k)
    if pt.k != snr.k:
        raise errors.BadDimension(f"rate tuple has {pt.k} users, channel has {snr.k}")
    b = params.b
    low = b_ind(snr)
    if b <= low + slack(low, tol):
        ones = np.ones(snr.k)
        if not (b - slack(b, tol) <= pt.b_rate <= low + slack(low, tol)):
            return None
        return power_split(ones) if _matches(pt.r, ne_rates(snr, ones, decoder), tol) else None
    if abs(pt.b_rate - b) > slack(b, tol):
        return None
    beta = _manifold_split_for(snr, b, pt, decoder, tol)
    return None if beta is None else power_split(beta)


def _directions(k: int, n: int) -> np.ndarray:
    """``n`` positive direction vectors (max entry 1), uniform direction first."""
    if n <= 0:
        return np.empty((0, k))
    if k == 2:
        theta = np.linspace(0.0, np.pi / 2, n + 2)[1:-1]
        raw = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        raw[np.argmin(np.abs(theta - np.pi / 4))] = 1.0
    else:
        pts = qmc.Halton(d=k, scramble=False).random(n)
        raw = np.vstack([np.ones(k), 0.02 + 0.98 * pts[: n - 1]])
    return raw / raw.max(axis=1, keepdims=True)


def ne_region_samples(
    snr: SnrTable, params: GameParams, decoder: DecoderSpec, n: int, tol: float = DEFAULT_TOL
) -> list[EquilibriumPoint]:
    """Sample points of the equilibrium set of a SUD or SIC receiver.

    With a vacuous demand the set is one rate point over the energy interval
    ``[b, b_ind]``; otherwise it is the image of the demand manifold at
    ``B = b``, sampled along ``n`` directions.
    """
    check_demand(params.b, snr, tol)
    decoder.check_users(snr.k)
    if decoder.kind == TIME_SHARE:
        raise errors.UnsupportedDecoder("sample SUD and SIC components separately")
    if n <= 0:
        return []
    b = params.b
    low = b_ind(snr)
    if b <= low + slack(low, tol):
        ones = np.ones(snr.k)
        levels = [low] if n == 1 else np.linspace(min(b, low), low, n)
        return [equilibrium_point(snr, ones, decoder, float(lv)) for lv in levels]
    out = []
    seen = set()
    for w in _directions(snr.k, n):
        beta = solve_beta_directional(snr, b, w, tol)
        key = tuple(np.round(beta, 12))
        if key in seen:
            continue
        seen.add(key)
        out.append(equilibrium_point(snr, beta, decoder, b))
    return out


def component_decoders(k: int, decoder: DecoderSpec | None = None) -> list[DecoderSpec]:
    """SUD/SIC decoders a time-sharing receiver mixes."""
    if decoder is not None and decoder.mixture:
        return [d for d, w in decoder.mixture if w > 0]
    return [DecoderSpec.sud()] + [DecoderSpec.sic(o.tolist()) for o in decoding_orders(k, limit=120)]


def in_convex_hull(points: np.ndarray, target: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    """Whether ``target`` is a convex combination of the rows of ``points``.

    Solved as an LP minimizing the L1 residual of the combination.
    """
    m, d = points.shape
    scale = max(1.0, float(np.abs(target).max()))
    # variables: lambda (m), residual+ (d), residual- (d)
    cost = np.concatenate([np.zeros(m), np.ones(2 * d)])
    a_eq = np.zeros((d + 1, m + 2 * d))
    a_eq[:d, :m] = points.T / scale
    a_eq[:d, m : m + d] = np.eye(d)
    a_eq[:d, m + d :] = -np.eye(d)
    a_eq[d, :m] = 1.0
    b_eq = np.append(target / scale, 1.0)
    res = linprog(cost, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    return bool(res.status == 0 and res.fun <= max(tol, 1e-10) * d)


def ne_region_contains(
    snr: SnrTable,
    params: GameParams,
    pt: RateTuple,
    decoder: DecoderSpec,
    samples: int = 256,
    tol: float = DEFAULT_TOL,
) -> bool:
    """Membership in the eta-NE information-energy region of ``decoder``.

    SUD and SIC are decided exactly: the rates are inverted to the unique
    split producing them, which must be all ones (vacuous demand, ``b <= B <=
    b_ind``) or lie on ``E(beta) = b`` with ``B = b``.  Time sharing is decided
    against the convex hull of ``samples`` points per component set, which
    approximates the region from inside.
    """
    if decoder.kind != TIME_SHARE:
        return ne_split_for(snr, params, pt, decoder, tol) is not None
    check_demand(params.b, snr, tol)
    decoder.check_users(snr.k)
    rows = []
    for comp in component_decoders(snr.k, decoder):
        rows.extend(p.rates.as_array() for p in ne_region_samples(snr, params, comp, samples, tol))
    return in_convex_hull(np.array(rows), pt.as_array(), tol)


def best_response_dynamics(
    snr: SnrTable,
    params: GameParams,
    decoder: DecoderSpec,
    start=None,
    max_rounds: int = 100,
    cooperative_init: bool = False,
    tol: float = DEFAULT_TOL,
) -> DynamicsResult:
    """Round-robin best responses, user 1 to K in every round.

    ``cooperative_init`` caps the start at the uniform cooperative split, which
    guarantees that the demand is met before anyone moves; without a start it
    simply starts there.  An infeasible move raises
    :class:`NoFeasibleResponse` tagged with the round (1-based).
    """
    if decoder.kind == TIME_SHARE:
        raise errors.UnsupportedDecoder("dynamics are defined for SUD and SIC only")
    decoder.check_users(snr.k)
    check_demand(params.b, snr, tol)
    if start is None:
        if not cooperative_init:
            raise ValueError("give a start split or enable cooperative_init")
        beta = solve_beta_uniform(snr, params.b, tol).copy()
    else:
        beta = power_split(start, snr.k).copy()
        if cooperative_init:
            beta = np.minimum(beta, solve_beta_uniform(snr, params.b, tol))
    trajectory = [beta.copy()]
    for rnd in range(1, max_rounds + 1):
        before = beta.copy()
        for i in range(snr.k):
            try:
                beta[i] = best_response(snr, params, beta, i, decoder, tol)
            except errors.NoFeasibleResponse as exc:
                exc.round = rnd
                exc.args = (f"round {rnd}: {exc.args[0]}",)
                raise
        trajectory.append(beta.copy())
        if np.max(np.abs(beta - before)) < 1e-9:
            return DynamicsResult(trajectory, True, rnd)
    return DynamicsResult(trajectory, False, max_rounds)


def point_record(point: EquilibriumPoint, params: GameParams) -> dict:
    """JSON-ready record of an equilibrium point (orders 1-based)."""
    rec = {"decoder": point.decoder.kind}
    if point.decoder.kind == SIC:
        rec["order"] = [u + 1 for u in point.decoder.order]
    rec.update(
        beta=point.split.tolist(),
        rates=point.rates.r.tolist(),
        B=point.rates.b_rate,
        eta=params.eta,
        b=params.b,
    )
    return rec
