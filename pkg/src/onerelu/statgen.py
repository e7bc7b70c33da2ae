"""Synthetic instances from a planted ReLU model, noise calibration and the asymptotic bracket.

Draw order for :func:`generate_instance` is fixed: ``beta*``, then the
training design row-major, then training noise, then the test design and
test noise, all from one ``numpy`` generator seeded with ``spec.seed``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .core import Dataset, Params, from_arrays
from .loss import empirical_S, psi_y


class DegenerateSignal(ValueError):
    """The planted scores have zero variance, so a noise level cannot be calibrated."""


@dataclass(frozen=True)
class StatModelSpec:
    p: int
    n: int
    sparsity: float = 0.5
    beta_star_mean: float = 0.5
    beta_star_var: float = 10.0
    dB: float = math.inf
    realizable_rows: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.p < 1 or self.n < 1:
            raise ValueError("need p >= 1 and n >= 1")
        if not 0.0 <= self.sparsity <= 1.0:
            raise ValueError("sparsity must lie in [0, 1]")
        if self.beta_star_var < 0:
            raise ValueError("beta_star_var must be >= 0")
        if self.realizable_rows and self.n < self.p:
            raise ValueError("realizable rows need n >= p")
        if not self.dB > 0:
            raise ValueError("dB must be positive (or inf)")

    @property
    def rho(self) -> float:
        return db_to_rho(self.dB)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["dB"] = "inf" if math.isinf(self.dB) else self.dB
        return out


@dataclass(frozen=True)
class Instance:
    train: Dataset
    test: Dataset
    truth: Params
    sigma: float
    rho: float
    design_var: float = 1.0

    def __iter__(self):
        return iter((self.train, self.test, self.truth))

    def truth_dict(self, spec: StatModelSpec | None = None) -> dict:
        out = {
            "schema": 1,
            "beta_star": self.truth.beta.tolist(),
            "beta0_star": self.truth.beta0,
            "sigma": self.sigma,
            "rho": self.rho,
            # ternary entries have variance P, so Cov(X) = P I
            "delta_sq": delta_squared(self.truth.beta, self.design_var * np.eye(self.truth.p)),
        }
        if spec is not None:
            out["spec"] = spec.to_dict()
        return out


@dataclass(frozen=True)
class AsymptoticBracket:
    lower: float
    upper: float
    gamma: float
    delta_sq: float

    @property
    def ratio_bound(self) -> float:
        """Asymptotic multiplicative ratio ``3/2 + (2 + 2 Delta^2) / (sqrt(2 pi) gamma)``."""
        if self.gamma == 0:
            return math.inf
        return 1.5 + (2 + 2 * self.delta_sq) / (math.sqrt(2 * math.pi) * self.gamma)

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "lower": self.lower,
            "upper": self.upper,
            "gamma": self.gamma,
            "delta_sq": self.delta_sq,
            "ratio_bound": self.ratio_bound,
        }


def db_to_rho(dB: float) -> float:
    """Noise-to-signal standard deviation ratio for a signal-to-noise level in decibels."""
    if math.isinf(dB) and dB > 0:
        return 0.0
    return 10.0 ** (-dB / 20.0)


def sign_pm1(v: np.ndarray) -> np.ndarray:
    """``+1`` for positive entries, ``-1`` otherwise (zero maps to ``-1``)."""
    return np.where(np.asarray(v) > 0, 1.0, -1.0)


def _ternary_design(rng: np.random.Generator, n: int, p: int, P: float) -> np.ndarray:
    u = rng.random((n, p))
    return np.where(u < P / 2, 1.0, np.where(u < P, -1.0, 0.0))


def generate_instance(spec: StatModelSpec) -> Instance:
    rng = np.random.default_rng(spec.seed)
    p, n = spec.p, spec.n
    beta = spec.beta_star_mean + math.sqrt(spec.beta_star_var) * rng.standard_normal(p)

    n_rand = n - p if spec.realizable_rows else n
    X = _ternary_design(rng, n_rand, p, spec.sparsity)
    if spec.realizable_rows:
        X = np.vstack([np.diag(sign_pm1(beta)), X])
    z = X @ beta
    sigma = float(np.sqrt(np.mean((z - z.mean()) ** 2)))
    rho = spec.rho
    if rho > 0 and sigma == 0:
        raise DegenerateSignal("planted scores are constant; cannot scale noise")
    eps = rng.standard_normal(n) * (rho * sigma)
    train = from_arrays(X, np.maximum(z, 0.0) + eps)

    Xt = _ternary_design(rng, n, p, spec.sparsity)
    eps_t = rng.standard_normal(n) * (rho * sigma)
    test = from_arrays(Xt, np.maximum(Xt @ beta, 0.0) + eps_t)
    return Instance(train, test, Params(beta, 0.0), sigma, rho, spec.sparsity)


def delta_squared(beta_star, Sigma) -> float:
    """Variance ``beta*' Sigma beta*`` of the planted score."""
    beta_star = np.asarray(beta_star, dtype=np.float64)
    Sigma = np.atleast_2d(np.asarray(Sigma, dtype=np.float64))
    if Sigma.shape != (beta_star.size, beta_star.size):
        raise ValueError("Sigma shape does not match beta*")
    if not np.allclose(Sigma, Sigma.T, rtol=0, atol=1e-12):
        raise ValueError("Sigma must be symmetric")
    return float(beta_star @ Sigma @ beta_star)


def asymptotic_bracket(gamma: float, delta_sq: float) -> AsymptoticBracket:
    if gamma < 0 or delta_sq < 0:
        raise ValueError("gamma and delta_sq must be >= 0")
    gamma, delta_sq = float(gamma), float(delta_sq)
    upper = 1.5 * gamma**2 + (2 + 2 * delta_sq) / math.sqrt(2 * math.pi) * gamma
    return AsymptoticBracket(gamma**2, upper, gamma, delta_sq)


def gaussian_instance(p: int, Sigma, beta_star, gamma: float, n: int, seed: int, beta0_star: float = 0.0) -> Dataset:
    """``X ~ N(0, Sigma)``, ``Y = max(0, X beta* + beta0*) + N(0, gamma^2)``."""
    rng = np.random.default_rng(seed)
    Sigma = np.atleast_2d(np.asarray(Sigma, dtype=np.float64))
    if Sigma.shape != (p, p):
        raise ValueError("Sigma must be p x p")
    # eigen square root also covers singular Sigma
    w, V = np.linalg.eigh(Sigma)
    X = rng.standard_normal((n, p)) @ (V * np.sqrt(np.clip(w, 0, None))).T
    beta_star = np.asarray(beta_star, dtype=np.float64)
    eps = gamma * rng.standard_normal(n)
    return from_arrays(X, np.maximum(X @ beta_star + beta0_star, 0.0) + eps)


def monte_carlo_check(p: int, Sigma, beta_star, gamma: float, n: int, seed: int = 0) -> tuple[float, float]:
    """Empirical ``S^0_n`` at the truth and its standard error."""
    if n < 1000:
        raise ValueError("Monte Carlo check needs n >= 1000")
    d = gaussian_instance(p, Sigma, beta_star, gamma, n, seed)
    truth = Params(np.asarray(beta_star, dtype=np.float64), 0.0)
    est = empirical_S(d, truth, 0.0)
    vals = psi_y(d.predict_linear(truth), d.y, 0.0)
    se = float(np.std(vals, ddof=1) / math.sqrt(n))
    return est, se
