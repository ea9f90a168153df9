"""Two-photon Hilbert space with polarization and spatial-mode qubits.

Basis ordering
--------------
Every photon carries a polarization qubit (``H``/``V``) and a spatial-mode
qubit (``a``/``b``). The 16 product kets are ordered most-significant-first as
``(pol1, mode1, pol2, mode2)``::

    index = 8*[pol1 == V] + 4*[mode1 == b] + 2*[pol2 == V] + [mode2 == b]

so a state vector reshaped to ``(2, 2, 2, 2)`` has axes ``(pol1, mode1, pol2,
mode2)`` and reshaped to ``(4, 4)`` has rows for photon 1 and columns for
photon 2. Raw amplitude arrays anywhere in the package follow this layout.
"""

from enum import Enum
from typing import NamedTuple

import numpy as np

from ._validation import ATOL, check_density_matrix, check_state

DIM = 16
_SQRT1_2 = 1.0 / np.sqrt(2.0)


class Pol(str, Enum):
    H = "H"
    V = "V"

    @property
    def bit(self):
        return 0 if self is Pol.H else 1


class Mode(str, Enum):
    a = "a"
    b = "b"

    @property
    def bit(self):
        return 0 if self is Mode.a else 1


class BasisKet(NamedTuple):
    pol1: Pol
    mode1: Mode
    pol2: Pol
    mode2: Mode

    @property
    def index(self):
        return 8 * self.pol1.bit + 4 * self.mode1.bit + 2 * self.pol2.bit + self.mode2.bit

    @classmethod
    def from_index(cls, index):
        if not 0 <= index < DIM:
            raise ValueError(f"basis index must lie in 0..15, got {index}")
        return cls(
            Pol.V if index & 8 else Pol.H,
            Mode.b if index & 4 else Mode.a,
            Pol.V if index & 2 else Pol.H,
            Mode.b if index & 1 else Mode.a,
        )

    def __str__(self):
        return f"|{self.pol1.value}{self.mode1.value}{self.pol2.value}{self.mode2.value}>"


BASIS = tuple(BasisKet.from_index(i) for i in range(DIM))


class BellLabel(str, Enum):
    """The four Bell states of each degree of freedom.

    Upper-case names are polarization states, lower-case names are
    spatial-mode (momentum) states.
    """

    Psi_plus = "Psi+"
    Psi_minus = "Psi-"
    Phi_plus = "Phi+"
    Phi_minus = "Phi-"
    psi_plus = "psi+"
    psi_minus = "psi-"
    phi_plus = "phi+"
    phi_minus = "phi-"

    @property
    def dof(self):
        return "polarization" if self.value[0].isupper() else "momentum"

    @property
    def kind(self):
        stem = "psi" if self.value[1] == "s" else "phi"
        return f"{stem}_{'plus' if self.value[-1] == '+' else 'minus'}"

    @property
    def sign_flipped(self):
        """Same family, opposite relative sign (e.g. ``Psi+`` -> ``Psi-``)."""
        return BellLabel(self.value[:-1] + ("-" if self.value[-1] == "+" else "+"))

    @classmethod
    def parse(cls, text):
        """Accept ``Psi+``, ``Psi-plus``, ``psi_minus`` and similar spellings."""
        if isinstance(text, cls):
            return text
        t = str(text).strip().replace("_", "-")
        for suffix, sign in (("-plus", "+"), ("-minus", "-")):
            if t.endswith(suffix):
                t = t[: -len(suffix)] + sign
        try:
            return cls(t)
        except ValueError:
            raise ValueError(f"unknown Bell label {text!r}") from None

    def __str__(self):
        return self.value


POLARIZATION_LABELS = (BellLabel.Psi_plus, BellLabel.Psi_minus, BellLabel.Phi_plus, BellLabel.Phi_minus)
MOMENTUM_LABELS = (BellLabel.psi_plus, BellLabel.psi_minus, BellLabel.phi_plus, BellLabel.phi_minus)


def _readonly(arr):
    arr.flags.writeable = False
    return arr


def basis_ket(pol1, mode1, pol2, mode2):
    """Unit vector for a single product ket, e.g. ``basis_ket("H", "b", "V", "a")``."""
    ket = BasisKet(Pol(pol1), Mode(mode1), Pol(pol2), Mode(mode2))
    psi = np.zeros(DIM, dtype=np.complex128)
    psi[ket.index] = 1.0
    return _readonly(psi)


def bell_state(label):
    """Four-amplitude two-photon factor for one degree of freedom.

    The factor is indexed ``2*x1 + x2`` with ``x = 0`` for ``H``/``a`` and
    ``x = 1`` for ``V``/``b``.
    """
    label = BellLabel.parse(label)
    factor = np.zeros(4, dtype=np.complex128)
    sign = 1.0 if label.value.endswith("+") else -1.0
    if label.kind.startswith("psi"):
        factor[0b01], factor[0b10] = _SQRT1_2, sign * _SQRT1_2
    else:
        factor[0b00], factor[0b11] = _SQRT1_2, sign * _SQRT1_2
    return _readonly(factor)


def product_state(pol_factor, mom_factor):
    """Combine a 4-amplitude polarization factor with a 4-amplitude mode factor."""
    pol = np.asarray(pol_factor, dtype=np.complex128).reshape(2, 2)
    mom = np.asarray(mom_factor, dtype=np.complex128).reshape(2, 2)
    # psi[p1, m1, p2, m2] = pol[p1, p2] * mom[m1, m2]
    return np.einsum("ik,jl->ijkl", pol, mom).reshape(DIM)


def hyper_product(pol_label, mom_label):
    """Hyperentangled product state ``|pol_label>|mom_label>`` as a 16-vector."""
    pol_label = BellLabel.parse(pol_label)
    mom_label = BellLabel.parse(mom_label)
    if pol_label.dof != "polarization" or mom_label.dof != "momentum":
        raise ValueError(
            f"expected (polarization, momentum) labels, got ({pol_label}: {pol_label.dof}, "
            f"{mom_label}: {mom_label.dof})"
        )
    return _readonly(product_state(bell_state(pol_label), bell_state(mom_label)))


def fidelity(phi, psi):
    """Overlap modulus ``|<phi|psi>|``; equals 1 iff equal up to global phase."""
    return float(abs(np.vdot(phi, psi)))


def same_state(phi, psi, atol=ATOL):
    return abs(fidelity(phi, psi) - 1.0) <= atol


def density_matrix(psi):
    psi = check_state(psi)
    return np.outer(psi, psi.conj())


def partial_trace_photon1(rho):
    """Reduced 4x4 matrix of photon 2 over its ``(pol2, mode2)`` factor."""
    rho = check_density_matrix(rho)
    return np.einsum("ijik->jk", rho.reshape(4, 4, 4, 4))


def partial_trace_photon2(rho):
    rho = check_density_matrix(rho)
    return np.einsum("ijkj->ik", rho.reshape(4, 4, 4, 4))


def reduced_photon2(psi):
    """Photon-2 reduced density matrix of a pure two-photon state."""
    return partial_trace_photon1(density_matrix(psi))


def reduced_momentum(psi):
    """Reduced density matrix of both photons' mode qubits (``(mode1, mode2)`` order)."""
    t = check_state(psi).reshape(2, 2, 2, 2)
    return np.einsum("ajbk,albm->jklm", t, t.conj()).reshape(4, 4)


def reduced_polarization(psi):
    t = check_state(psi).reshape(2, 2, 2, 2)
    return np.einsum("jakb,lamb->jklm", t, t.conj()).reshape(4, 4)


def trace_distance(rho, sigma):
    """Half the trace norm of ``rho - sigma`` (both Hermitian)."""
    diff = np.asarray(rho) - np.asarray(sigma)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))


def is_density_matrix(rho, atol=ATOL):
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if not np.allclose(rho, rho.conj().T, rtol=0.0, atol=atol):
        return False
    if abs(np.trace(rho) - 1.0) > atol:
        return False
    return bool(np.min(np.linalg.eigvalsh(rho)) >= -atol)
