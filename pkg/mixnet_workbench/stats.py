"""Statistical oracles shared by tests, the simulator and selftest."""

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class UniformityResult:
    statistic: float
    pvalue: float
    categories: int
    samples: int

    def passes(self, alpha: float = 0.01) -> bool:
        return self.pvalue > alpha


def chi_square_uniform(counts: Sequence[int] | np.ndarray) -> UniformityResult:
    observed = np.asarray(counts, dtype=float)
    if observed.size < 2:
        raise ValueError('uniformity needs at least two categories')
    result = stats.chisquare(observed)
    return UniformityResult(float(result.statistic), float(result.pvalue), int(observed.size), int(observed.sum()))


def category_counts(values: Iterable, categories: Sequence) -> np.ndarray:
    position = {category: i for i, category in enumerate(categories)}
    counts = np.zeros(len(categories), dtype=np.int64)
    for value in values:
        counts[position[value]] += 1
    return counts


def combined_chi_square(groups: Mapping[int, Sequence[int]]) -> UniformityResult:
    """Sum independent per-group chi-square statistics; degrees of freedom add up."""
    statistic, dof, samples = 0.0, 0, 0
    for counts in groups.values():
        observed = np.asarray(counts, dtype=float)
        if observed.size < 2 or observed.sum() == 0:
            continue
        statistic += float(stats.chisquare(observed).statistic)
        dof += observed.size - 1
        samples += int(observed.sum())
    if dof == 0:
        raise ValueError('no group carried enough data')
    return UniformityResult(statistic, float(stats.chi2.sf(statistic, dof)), dof + 1, samples)


@dataclass(frozen=True)
class DistinguisherResult:
    accuracy: float
    trials: int

    @property
    def sigma(self) -> float:
        return float(np.sqrt(0.25 / self.trials))

    @property
    def advantage_sigmas(self) -> float:
        return abs(self.accuracy - 0.5) / self.sigma

    def within_chance(self, sigmas: float = 2.0) -> bool:
        return self.advantage_sigmas <= sigmas


def _byte_features(samples: Sequence[bytes]) -> np.ndarray:
    matrix = np.frombuffer(b''.join(samples), dtype=np.uint8).reshape(len(samples), -1).astype(float)
    bits = np.unpackbits(matrix.astype(np.uint8), axis=1).astype(float)
    return np.hstack([matrix / 255.0, bits])


def frequency_distinguisher(first: Sequence[bytes], second: Sequence[bytes]) -> DistinguisherResult:
    """Nearest-centroid classifier over byte values and bit frequencies.

    Half of each population trains the centroids, the other half is classified. Equal-length inputs
    are required.
    """
    if len(first) < 4 or len(second) < 4:
        raise ValueError('each population needs at least four samples')
    a, b = _byte_features(first), _byte_features(second)
    half_a, half_b = len(a) // 2, len(b) // 2
    centroid_a, centroid_b = a[:half_a].mean(axis=0), b[:half_b].mean(axis=0)
    test = np.vstack([a[half_a:], b[half_b:]])
    truth = np.concatenate([np.zeros(len(a) - half_a), np.ones(len(b) - half_b)])
    dist_a = np.abs(test - centroid_a).sum(axis=1)
    dist_b = np.abs(test - centroid_b).sum(axis=1)
    guess = (dist_b < dist_a).astype(float)
    return DistinguisherResult(float((guess == truth).mean()), int(len(test)))


def poisson_z_scores(counts: Mapping[str, int]) -> dict[str, float]:
    """z-score of each count against the uniform share of the total, with Poisson variance."""
    total = sum(counts.values())
    if not counts or total == 0:
        return {key: 0.0 for key in counts}
    expected = total / len(counts)
    return {key: (value - expected) / np.sqrt(expected) for key, value in counts.items()}


def ks_test(samples: Sequence[float] | np.ndarray, cdf) -> float:
    return float(stats.kstest(np.asarray(samples, dtype=float), cdf).pvalue)
