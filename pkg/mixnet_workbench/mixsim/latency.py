"""Latency and cover-traffic arithmetic.

Per-hop delays are exponential with rate λ (mean μ = 1/λ); a k-hop trip is therefore Erlang(k, λ).
The gateway decoy bound comes from the coupon collector: covering n next-layer nodes takes n·H_n draws
in expectation.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import stats

from mixnet_workbench.mixsim.errors import ConfigError


def sample_hop_delay(rate: float, rng: np.random.Generator) -> float:
    if rate <= 0:
        raise ConfigError('hop delay rate must be positive', field='rate')
    return float(rng.exponential(1.0 / rate))


@dataclass(frozen=True)
class ErlangLatency:
    hops: int
    rate: float

    def __post_init__(self):
        if self.hops < 1:
            raise ConfigError('hop count must be at least 1', field='hops')
        if self.rate <= 0:
            raise ConfigError('hop delay rate must be positive', field='rate')

    @cached_property
    def distribution(self):
        return stats.erlang(a=self.hops, scale=1.0 / self.rate)

    @property
    def mean(self) -> float:
        return self.hops / self.rate

    @property
    def std(self) -> float:
        return math.sqrt(self.hops) / self.rate

    def pdf(self, x):
        return self.distribution.pdf(x)

    def cdf(self, x):
        return self.distribution.cdf(x)

    def sf(self, x):
        return self.distribution.sf(x)

    def sample(self, rng: np.random.Generator, size: int | None = None):
        return rng.gamma(self.hops, 1.0 / self.rate, size=size)

    def closed_form_cdf(self, x: float) -> float:
        """``1 − Σ_{n<k} e^{−λx} (λx)^n / n!``, independent of scipy."""
        if x <= 0:
            return 0.0
        lx = self.rate * x
        term, total = 1.0, 1.0
        for n in range(1, self.hops):
            term *= lx / n
            total += term
        return 1.0 - math.exp(-lx) * total


def rtt_distribution(hops: int, rate: float) -> ErlangLatency:
    return ErlangLatency(hops, rate)


def harmonic(n: int) -> float:
    return sum(1.0 / i for i in range(1, n + 1))


@dataclass(frozen=True)
class CouponBound:
    per_mu: float
    per_second: float
    log_per_mu: float

    @property
    def constant_ratio(self) -> float:
        return self.per_mu / self.log_per_mu if self.log_per_mu else math.inf


def coupon_bound(width: int, gateways: int, rate: float) -> CouponBound:
    """Packets each gateway should emit per mean-delay period μ.

    ``n·H_n`` packets cover one layer of n nodes in expectation; the n/g factor spreads the n source
    nodes of the next layer across g gateways. The ``ln n`` variant is reported alongside.
    """
    if width < 1 or gateways < 1:
        raise ConfigError('layer width and gateway count must be at least 1')
    if rate <= 0:
        raise ConfigError('hop delay rate must be positive', field='rate')
    per_mu = width * harmonic(width) * width / gateways
    log_per_mu = width * math.log(width) * width / gateways
    return CouponBound(per_mu=per_mu, per_second=per_mu * rate, log_per_mu=log_per_mu)


@dataclass(frozen=True)
class CoverageRate:
    per_link_per_mu: float
    per_gateway_per_mu: float
    per_gateway_per_second: float
    target: float
    bound_multiple: float


def coverage_rate(width: int, gateways: int, rate: float, target: float = 0.99, link_layers: int = 1) -> CoverageRate:
    """Gateway rate at which every inter-layer link carries a packet in a μ-window with probability ``target``.

    With Poisson arrivals of mean r per link and window, ``(1 − e^{−r})^(links) = target``.
    """
    if not 0 < target < 1:
        raise ConfigError('coverage target must lie strictly between 0 and 1', field='target')
    links = link_layers * width * width
    per_link = -math.log(1.0 - target ** (1.0 / links))
    per_gateway = per_link * width * width / gateways
    bound = coupon_bound(width, gateways, rate)
    return CoverageRate(
        per_link_per_mu=per_link,
        per_gateway_per_mu=per_gateway,
        per_gateway_per_second=per_gateway * rate,
        target=target,
        bound_multiple=per_gateway / bound.per_mu,
    )


def coupon_collector_draws(n: int, rng: np.random.Generator, trials: int = 1) -> np.ndarray:
    """Number of uniform draws needed to see all ``n`` coupons, for each trial."""
    results = np.empty(trials, dtype=np.int64)
    for t in range(trials):
        seen = np.zeros(n, dtype=bool)
        remaining, draws = n, 0
        while remaining:
            batch = rng.integers(0, n, size=max(4 * n, 16))
            for coupon in batch:
                draws += 1
                if not seen[coupon]:
                    seen[coupon] = True
                    remaining -= 1
                    if not remaining:
                        break
        results[t] = draws
    return results
