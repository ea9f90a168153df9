"""Seeded Monte Carlo sampling of coincidence events.

Draws use ``numpy.random.PCG64`` seeded with the caller's integer seed and
inverse-CDF lookup over the analyzer's 16 signatures in basis order, so a
given ``(analyzer, state, shots, seed)`` always yields the same counts.
"""

import io
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_shots, check_state
from .hilbert import BellLabel

RNG_ALGORITHM = "numpy.random.PCG64"
SAMPLING_METHOD = "inverse-cdf/basis-order"


def make_rng(seed):
    """The only generator used for sampling; ``seed`` may be an int or a sequence of ints."""
    if isinstance(seed, bool):
        raise TypeError("seed must be an integer")
    return np.random.Generator(np.random.PCG64(seed))


def inverse_cdf_draw(probs, shots, rng):
    """Indices drawn i.i.d. from ``probs`` by inverse-CDF lookup."""
    probs = np.asarray(probs, dtype=float)
    if np.any(probs < 0):
        raise ValueError("negative probability")
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    u = rng.random(shots)
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(probs) - 1)


@dataclass
class SampleReport:
    seed: int
    shots: int
    analyzer: str
    counts: dict
    empirical: dict
    rng: str = RNG_ALGORITHM
    method: str = SAMPLING_METHOD
    decoded: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not add up to shots")

    def to_dict(self):
        return {
            "seed": self.seed,
            "shots": self.shots,
            "analyzer": self.analyzer,
            "rng": self.rng,
            "method": self.method,
            "signatures": [
                {
                    "signature": str(sig),
                    "label": str(self.decoded[sig]),
                    "count": int(n),
                    "frequency": n / self.shots,
                }
                for sig, n in self.counts.items()
            ],
            "empirical": {str(k): v for k, v in self.empirical.items()},
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self):
        buf = io.StringIO()
        buf.write(f"# analyzer={self.analyzer} seed={self.seed} shots={self.shots} rng={self.rng}\n")
        buf.write(f"{'signature':<10} {'label':<6} {'count':>8} {'frequency':>12}\n")
        for sig, n in self.counts.items():
            buf.write(f"{str(sig):<10} {str(self.decoded[sig]):<6} {n:>8d} {n / self.shots:>12.6f}\n")
        buf.write("# decoded\n")
        for label, f in self.empirical.items():
            buf.write(f"{str(label):<10} {f:.6f}\n")
        return buf.getvalue()


def sample(analyzer, psi, shots, seed):
    """Sample ``shots`` coincidence events of ``psi`` through ``analyzer``."""
    shots = check_shots(shots)
    psi = check_state(psi)
    probs = analyzer.transform(psi[np.newaxis, :])[0]
    idx = inverse_cdf_draw(probs, shots, make_rng(seed))
    counts_arr = np.bincount(idx, minlength=len(probs))
    counts = {sig: int(n) for sig, n in zip(analyzer.signatures_, counts_arr)}
    decoded = {sig: analyzer.decode(sig) for sig in analyzer.signatures_}
    empirical = {BellLabel(c): 0 for c in analyzer.classes_}
    for sig, n in counts.items():
        empirical[decoded[sig]] += n
    empirical = {k: v / shots for k, v in empirical.items()}
    return SampleReport(seed, shots, analyzer.dof, counts, empirical, decoded=decoded)


def sigma(p, shots):
    return math.sqrt(max(p * (1.0 - p), 0.0) / shots)


def deviation_in_sigmas(empirical, exact, shots):
    """Largest ``|f - p| / sigma`` over matching keys.

    Entries with ``sigma == 0`` must agree exactly; a mismatch there counts
    as an infinite deviation.
    """
    worst = 0.0
    for key, p in exact.items():
        f = empirical.get(key, 0.0)
        s = sigma(p, shots)
        if s == 0.0:
            if abs(f - p) > 1e-15:
                return math.inf
            continue
        worst = max(worst, abs(f - p) / s)
    return worst


def check_convergence(empirical, exact, shots, k=5.0):
    """True when every frequency lies within ``k`` sigma; exactly ``k`` warns."""
    worst = deviation_in_sigmas(empirical, exact, shots)
    if worst == k:
        warnings.warn(f"frequency deviation sits exactly at {k} sigma", RuntimeWarning)
        return True
    return worst < k
