"""Dense coding and nonlocal Bell-state measurement on top of the analyzers.

Dense coding: Alice and Bob share ``|Phi+>|psi+>``. Alice writes two bits
into the polarization Bell state with wave plates on photon 1 (both modes,
so the mode ancilla is untouched) and sends the photon; Bob reads it with
the polarization analyzer.

Teleportation is deliberately absent. With this resource a teleportation
scheme needs a two-photon gate to entangle the incoming photon's spatial
mode first, after which that gate alone would already do the Bell
measurement, so hyperentanglement buys nothing there.
"""

import io
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._validation import ATOL, check_shots, check_state
from .analyzer import build_polarization_bsa
from .elements import apply, compose, hwp, identity, mode_phase
from .hilbert import (
    BellLabel,
    hyper_product,
    partial_trace_photon1,
    reduced_momentum,
    reduced_photon2,
    reduced_polarization,
    bell_state,
    same_state,
    trace_distance,
)
from .measurement import RNG_ALGORITHM, inverse_cdf_draw, make_rng

MESSAGES = ("00", "01", "10", "11")
MESSAGE_TO_LABEL = {
    "00": BellLabel.Phi_plus,
    "01": BellLabel.Phi_minus,
    "10": BellLabel.Psi_plus,
    "11": BellLabel.Psi_minus,
}
LABEL_TO_MESSAGE = {v: k for k, v in MESSAGE_TO_LABEL.items()}
RESOURCE_LABELS = (BellLabel.Phi_plus, BellLabel.psi_plus)
BITS_PER_RUN = 2


def resource_state():
    return hyper_product(*RESOURCE_LABELS)


def _check_message(message):
    message = str(message)
    if message not in MESSAGE_TO_LABEL:
        raise ValueError(f"message must be one of {MESSAGES}, got {message!r}")
    return message


def encoder(message):
    """Wave plates on photon 1 (both modes) that write ``message``.

    HWP at 0 is a polarization phase flip, HWP at 45 degrees a bit flip.
    """
    message = _check_message(message)
    ops = []
    if message[0] == "1":
        ops.append(hwp(1, "both", math.pi / 4))
    if message[1] == "1":
        ops.append(hwp(1, "both", 0.0))
    return compose(ops) if ops else identity()


def encode(message, psi=None):
    """Apply the encoder for ``message`` to the shared resource ``|Phi+>|psi+>``."""
    psi = resource_state() if psi is None else check_state(psi)
    if not same_state(psi, resource_state()):
        raise ValueError("encode expects the shared resource state |Phi+>|psi+>")
    return apply(encoder(message), psi)


def exact_channel(noise_alpha=0.0, analyzer=None):
    """Row-stochastic matrix ``P[sent, decoded]`` over ``MESSAGES``."""
    analyzer = analyzer or build_polarization_bsa()
    noise = mode_phase(1, "b", noise_alpha)
    rows = []
    for m in MESSAGES:
        law = analyzer.classify(apply(noise, encode(m)))
        rows.append([law[MESSAGE_TO_LABEL[d]] for d in MESSAGES])
    return np.array(rows)


def mutual_information(channel, prior=None):
    """Mutual information in bits between input and output of ``channel``."""
    channel = np.asarray(channel, dtype=float)
    prior = np.full(channel.shape[0], 1.0 / channel.shape[0]) if prior is None else np.asarray(prior)
    joint = prior[:, None] * channel
    out = joint.sum(axis=0)
    mask = joint > 0
    ratio = joint[mask] / (prior[:, None] * out[None, :])[mask]
    return float(np.sum(joint[mask] * np.log2(ratio)))


@dataclass
class RoundTripReport:
    message: str
    noise_alpha: float
    shots: int
    seed: object
    counts: dict
    exact: dict
    rng: str = RNG_ALGORITHM

    @property
    def frequencies(self):
        return {m: n / self.shots for m, n in self.counts.items()}

    @property
    def error_rate(self):
        return 1.0 - self.counts[self.message] / self.shots

    @property
    def exact_error_rate(self):
        return 1.0 - self.exact[self.message]

    @property
    def bit_error_rate(self):
        """Fraction of wrong bits among all decoded bits."""
        wrong = sum(n * sum(a != b for a, b in zip(m, self.message)) for m, n in self.counts.items())
        return wrong / (2 * self.shots)

    def to_dict(self):
        return {
            "message": self.message,
            "noise_alpha": self.noise_alpha,
            "shots": self.shots,
            "seed": self.seed,
            "rng": self.rng,
            "decoded": [
                {"sent": self.message, "decoded": m, "count": n, "frequency": n / self.shots, "exact": self.exact[m]}
                for m, n in self.counts.items()
            ],
            "error_rate": self.error_rate,
            "bit_error_rate": self.bit_error_rate,
            "exact_error_rate": self.exact_error_rate,
        }


def dense_code_roundtrip(message, noise_alpha=0.0, shots=10_000, seed=0, analyzer=None):
    """Encode, pass through the phase-noise channel, measure and decode.

    The phase ``noise_alpha`` lands on photon 1's mode ``b`` between encoding
    and measurement.
    """
    message = _check_message(message)
    shots = check_shots(shots)
    analyzer = analyzer or build_polarization_bsa()
    psi = apply(mode_phase(1, "b", noise_alpha), encode(message))
    probs = analyzer.transform(psi[np.newaxis, :])[0]
    idx = inverse_cdf_draw(probs, shots, make_rng(seed))
    counts = dict.fromkeys(MESSAGES, 0)
    for sig_index, n in enumerate(np.bincount(idx, minlength=len(probs))):
        counts[LABEL_TO_MESSAGE[analyzer.decode(analyzer.signatures_[sig_index])]] += int(n)
    law = analyzer.classify(psi)
    exact = {m: law[MESSAGE_TO_LABEL[m]] for m in MESSAGES}
    return RoundTripReport(message, float(noise_alpha), shots, seed, counts, exact)


@dataclass
class DenseCodingReport:
    noise_alpha: float
    shots: int
    seed: int
    runs: list
    channel: np.ndarray = field(repr=False)

    @property
    def mutual_information(self):
        return mutual_information(self.channel)

    @property
    def empirical_mutual_information(self):
        return mutual_information(np.array([[r.frequencies[m] for m in MESSAGES] for r in self.runs]))

    @property
    def bit_error_rate(self):
        return float(np.mean([r.bit_error_rate for r in self.runs]))

    def capacity_accounting(self):
        # The sent photon carries two qubits; the shared resource has four.
        mi = self.mutual_information
        return {"bits_per_sent_photon": mi, "bits_per_sent_qubit": mi / 2, "bits_per_resource_qubit": mi / 4}

    def to_dict(self):
        return {
            "noise_alpha": self.noise_alpha,
            "shots": self.shots,
            "seed": self.seed,
            "rng": RNG_ALGORITHM,
            "runs": [r.to_dict() for r in self.runs],
            "bit_error_rate": self.bit_error_rate,
            "mutual_information_bits": self.mutual_information,
            "empirical_mutual_information_bits": self.empirical_mutual_information,
            **self.capacity_accounting(),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self):
        buf = io.StringIO()
        buf.write(f"{'sent':<5} {'decoded':<8} {'count':>8} {'frequency':>10} {'exact':>10}\n")
        for r in self.runs:
            for m, n in r.counts.items():
                buf.write(f"{r.message:<5} {m:<8} {n:>8d} {n / r.shots:>10.6f} {r.exact[m]:>10.6f}\n")
        buf.write(f"{'sent':<5} {'error_rate':>10} {'bit_error_rate':>15}\n")
        for r in self.runs:
            buf.write(f"{r.message:<5} {r.error_rate:>10.6f} {r.bit_error_rate:>15.6f}\n")
        buf.write(f"# aggregate bit_error_rate {self.bit_error_rate:.6f}\n")
        buf.write(f"# mutual_information_bits {self.mutual_information:.3f}\n")
        for k, v in self.capacity_accounting().items():
            buf.write(f"# {k} {v:.3f}\n")
        return buf.getvalue()


def run_dense_coding(noise_alpha=0.0, shots=10_000, seed=0):
    """Round trip for all four messages; message ``i`` uses seed ``seed + i``."""
    analyzer = build_polarization_bsa()
    runs = [
        dense_code_roundtrip(m, noise_alpha, shots, seed + i, analyzer=analyzer)
        for i, m in enumerate(MESSAGES)
    ]
    return DenseCodingReport(float(noise_alpha), shots, seed, runs, exact_channel(noise_alpha, analyzer))


class ClassicalMessage(NamedTuple):
    """Two bits naming photon 1's detector: (port bit, axis bit)."""

    port_bit: int
    axis_bit: int

    @property
    def n_bits(self):
        return len(self)


class NonlocalRun(NamedTuple):
    local_detector: object
    message: ClassicalMessage
    remote_detector: object
    label: BellLabel


def _check_ancilla_family(psi, analyzer):
    anc = bell_state(analyzer.ancilla_)
    reduced = reduced_momentum(psi) if analyzer.dof == "polarization" else reduced_polarization(psi)
    if not np.allclose(reduced, np.outer(anc, anc.conj()), atol=1e-10):
        raise ValueError(f"state is not of the form |Pi>|{analyzer.ancilla_}>")


def nonlocal_bsm(psi, seed=0, analyzer=None):
    """One run of the two-station measurement.

    Photon 1's station detects its photon and sends 2 bits naming the
    detector; photon 2's station detects its own photon and decodes the pair.
    """
    analyzer = analyzer or build_polarization_bsa()
    psi = check_state(psi)
    _check_ancilla_family(psi, analyzer)
    rng = make_rng(seed)
    amps = analyzer.final_state(psi).reshape(4, 4)
    p_local = np.sum(np.abs(amps) ** 2, axis=1)
    i = int(inverse_cdf_draw(p_local, 1, rng)[0])
    message = ClassicalMessage(i & 1, i >> 1)
    row = amps[(message.axis_bit << 1) | message.port_bit]
    j = int(inverse_cdf_draw(np.abs(row) ** 2, 1, rng)[0])
    sig = analyzer.signatures_[4 * i + j]
    return NonlocalRun(sig.d1, message, sig.d2, analyzer.decode(sig))


def nonlocal_label_law(psi, analyzer=None):
    """Exact label law of the two-station procedure and bits used per run.

    Photon 1's measurement is applied as a projector on the full density
    matrix; photon 2's outcome law comes from the conditional reduced state.
    """
    analyzer = analyzer or build_polarization_bsa()
    psi = check_state(psi)
    _check_ancilla_family(psi, analyzer)
    final = analyzer.final_state(psi)
    rho = np.outer(final, final.conj())
    law = {BellLabel(c): 0.0 for c in analyzer.classes_}
    bits = set()
    for i in range(4):
        proj = np.kron(np.diag(np.eye(4)[i]), np.eye(4))
        p_local = float(np.real(np.trace(proj @ rho)))
        if p_local <= 0.0:
            continue
        message = ClassicalMessage(i & 1, i >> 1)
        bits.add(message.n_bits)
        rho2 = partial_trace_photon1(proj @ rho @ proj / p_local)
        for j, p in enumerate(np.real(np.diag(rho2))):
            law[analyzer.decode(analyzer.signatures_[4 * i + j])] += p_local * float(p)
    if bits != {BITS_PER_RUN}:
        raise RuntimeError(f"unexpected classical message sizes {bits}")
    return law, BITS_PER_RUN


def security_check(message):
    """Photon-2 reduced density matrix of the encoded resource."""
    return reduced_photon2(encode(message))


def eavesdropper_distance(message):
    """Trace distance between the intercepted photon's state and I/4."""
    return trace_distance(security_check(message), np.eye(4) / 4)


def encoding_is_local(message, atol=ATOL):
    """Photon 2's reduced state is unchanged by encoding."""
    return bool(np.allclose(security_check(message), reduced_photon2(resource_state()), atol=atol))
