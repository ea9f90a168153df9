"""Complete Bell-state analyzers for hyperentangled photon pairs.

Two analyzers are provided:

``polarization``
    PBS on each photon (polarization-controlled mode flip), then a +/-45
    degree polarization analyzer in every output mode. Reads the
    polarization Bell state, using the mode state ``psi+`` as ancilla.
``momentum``
    HWP at 45 degrees in mode ``b`` of each photon (mode-controlled
    polarization flip), a 50:50 beam splitter on each photon, then H/V
    analysis. Reads the mode Bell state, using ``Psi+`` as ancilla.

Both are exposed as scikit-learn classifiers over rows of 16 complex
amplitudes: ``predict_proba`` is the exact Born-rule label distribution and
``transform`` returns the 16 coincidence-signature probabilities.
"""

import json
import math
from importlib import resources
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_state, check_states
from .elements import CircuitDescription, apply, apply_batch, beamsplitter, compose, hwp, pa_45, pbs
from .hilbert import BASIS, MOMENTUM_LABELS, POLARIZATION_LABELS, BellLabel, hyper_product

DOFS = ("polarization", "momentum")
NOMINAL_ANCILLA = {"polarization": BellLabel.psi_plus, "momentum": BellLabel.Psi_plus}
_AXES = {"polarization": ("+", "-"), "momentum": ("H", "V")}


class AnalyzerConstructionError(RuntimeError):
    """The simulated circuit does not reproduce the reference signature table."""


class UnknownSignatureError(KeyError):
    pass


class DetectorLabel(NamedTuple):
    photon: int
    port: str
    axis: str

    def __str__(self):
        return f"{self.port}{self.photon}{self.axis}"

    @classmethod
    def parse(cls, text):
        text = text.strip()
        if len(text) != 3 or text[0] not in "AB" or text[1] not in "12":
            raise ValueError(f"bad detector label {text!r}")
        return cls(int(text[1]), text[0], text[2])


class DetectorSignature(NamedTuple):
    """Coincidence of one detector on photon 1's side and one on photon 2's."""

    d1: DetectorLabel
    d2: DetectorLabel

    def __str__(self):
        return f"{self.d1}{self.d2}"

    @classmethod
    def parse(cls, text):
        text = "".join(str(text).split())
        if len(text) != 6:
            raise ValueError(f"bad detector signature {text!r}")
        d1, d2 = DetectorLabel.parse(text[:3]), DetectorLabel.parse(text[3:])
        if (d1.photon, d2.photon) != (1, 2):
            raise ValueError(f"signature {text!r} must name photon 1 then photon 2")
        return cls(d1, d2)


def load_reference_tables():
    """Reference detector-signature tables shipped with the package."""
    raw = json.loads(resources.files("hyperbell").joinpath("data/signature_tables.json").read_text())
    tables = {}
    for dof, entry in raw.items():
        rows = {
            BellLabel.parse(label): tuple(DetectorSignature.parse(s) for s in sigs)
            for label, sigs in entry["rows"].items()
        }
        tables[dof] = {"ancilla": BellLabel.parse(entry["ancilla"]), "rows": rows}
    return tables


def _signatures(dof):
    axes = _AXES[dof]
    sigs = []
    for ket in BASIS:
        d1 = DetectorLabel(1, "A" if ket.mode1.value == "a" else "B", axes[ket.pol1.bit])
        d2 = DetectorLabel(2, "A" if ket.mode2.value == "a" else "B", axes[ket.pol2.bit])
        sigs.append(DetectorSignature(d1, d2))
    return tuple(sigs)


def _circuit(dof):
    if dof == "polarization":
        return [pbs(1), pbs(2), pa_45(1), pa_45(2)]
    return [hwp(1, "b", math.pi / 4), hwp(2, "b", math.pi / 4), beamsplitter(1), beamsplitter(2)]


def signal_labels(dof):
    return POLARIZATION_LABELS if dof == "polarization" else MOMENTUM_LABELS


def prepare_input(dof, label, ancilla=None):
    """``|label>`` in the analyzed degree of freedom tensored with the ancilla."""
    label = BellLabel.parse(label)
    ancilla = NOMINAL_ANCILLA[dof] if ancilla is None else BellLabel.parse(ancilla)
    if label.dof != dof:
        raise ValueError(f"{label} is not a {dof} Bell label")
    if dof == "polarization":
        return hyper_product(label, ancilla)
    return hyper_product(ancilla, label)


class BellStateAnalyzer(ClassifierMixin, BaseEstimator):
    """Hyperentanglement-assisted complete Bell-state analyzer.

    Parameters
    ----------
    dof : {"polarization", "momentum"}
        Degree of freedom whose Bell state is read out; the other one is
        the ancilla.
    tol : float
        Off-row probability above which a reproduced signature table is
        considered broken during :meth:`fit`.

    The analyzer has nothing to learn. ``fit`` assembles the optical circuit
    and checks its simulated signature table against the reference table,
    raising :class:`AnalyzerConstructionError` on any mismatch or overlap.
    """

    def __init__(self, dof="polarization", tol=1e-12):
        self.dof = dof
        self.tol = tol

    def fit(self, X=None, y=None):
        if self.dof not in DOFS:
            raise ValueError(f"dof must be one of {DOFS}, got {self.dof!r}")
        if X is not None:
            check_states(X)
        ops = _circuit(self.dof)
        self.circuit_ = compose(ops)
        self.circuit_description_ = CircuitDescription.from_ops(ops)
        self.signatures_ = _signatures(self.dof)
        self.ancilla_ = NOMINAL_ANCILLA[self.dof]
        self.classes_ = np.array([lab.value for lab in signal_labels(self.dof)])
        self.n_features_in_ = len(BASIS)

        reference = load_reference_tables()[self.dof]["rows"]
        table, claimed = {}, {}
        for label in signal_labels(self.dof):
            probs = self._probabilities(prepare_input(self.dof, label)[np.newaxis, :])[0]
            support = {self.signatures_[i] for i in np.flatnonzero(probs > self.tol)}
            if support != set(reference[label]):
                raise AnalyzerConstructionError(
                    f"{self.dof} analyzer: simulated support for {label} "
                    f"{sorted(map(str, support))} != reference {sorted(map(str, reference[label]))}"
                )
            for sig in support:
                if sig in claimed:
                    raise AnalyzerConstructionError(f"signature {sig} claimed by {claimed[sig]} and {label}")
                claimed[sig] = label
            table[label] = reference[label]
        if len(claimed) != len(self.signatures_):
            raise AnalyzerConstructionError("reference rows do not cover every signature")
        self.table_ = table
        self.decoder_ = claimed
        self._class_index = np.array(
            [list(signal_labels(self.dof)).index(claimed[s]) for s in self.signatures_]
        )
        return self

    def _probabilities(self, X):
        out = apply_batch(self.circuit_, X)
        return np.abs(out) ** 2

    def final_state(self, psi):
        check_is_fitted(self)
        return apply(self.circuit_, psi)

    def transform(self, X):
        """Coincidence-signature probabilities, columns in ``signatures_`` order."""
        check_is_fitted(self)
        return self._probabilities(check_states(X))

    def predict_proba(self, X):
        """Exact label distribution per row, columns in ``classes_`` order."""
        P = self.transform(X)
        proba = np.zeros((P.shape[0], len(self.classes_)))
        np.add.at(proba.T, self._class_index, P.T)
        return proba

    def predict(self, X):
        check_is_fitted(self)
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]

    def outcome_distribution(self, psi):
        """Map of every coincidence signature to its Born-rule probability."""
        psi = check_state(psi)
        probs = self.transform(psi[np.newaxis, :])[0]
        total = probs.sum()
        if abs(total - 1.0) > 1e-10:
            raise RuntimeError(f"outcome probabilities sum to {total!r}")
        return dict(zip(self.signatures_, probs.tolist()))

    def decode(self, sig):
        check_is_fitted(self)
        if isinstance(sig, str):
            try:
                sig = DetectorSignature.parse(sig)
            except ValueError as exc:
                raise UnknownSignatureError(str(exc)) from None
        try:
            return self.decoder_[sig]
        except KeyError:
            raise UnknownSignatureError(f"{sig} is not a detector signature of the {self.dof} analyzer") from None

    def classify(self, psi):
        """Label distribution of a single state as ``{BellLabel: probability}``."""
        psi = check_state(psi)
        proba = self.predict_proba(psi[np.newaxis, :])[0]
        return {BellLabel(c): float(p) for c, p in zip(self.classes_, proba)}

    def describe(self):
        """Text export: element list followed by the signature table."""
        check_is_fitted(self)
        lines = [f"# analyzer: {self.dof} (ancilla {self.ancilla_})", "# elements"]
        lines += self.circuit_description_.to_text().splitlines()
        lines.append("# signature table")
        for label, sigs in self.table_.items():
            lines.append(f"{label}: " + " ".join(str(s) for s in sigs))
        return "\n".join(lines) + "\n"


def build_polarization_bsa():
    return BellStateAnalyzer("polarization").fit()


def build_momentum_bsa():
    return BellStateAnalyzer("momentum").fit()


def outcome_distribution(analyzer, psi):
    return analyzer.outcome_distribution(psi)


def decode(analyzer, sig):
    return analyzer.decode(sig)


def classify(analyzer, psi):
    return analyzer.classify(psi)
