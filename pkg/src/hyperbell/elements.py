"""Linear optical elements acting on one photon's (polarization, mode) factor.

Each element is a 4x4 unitary on a single photon, indexed ``2*pol + mode``
(``H=0, V=1, a=0, b=1``). An :class:`ElementOp` keeps the sequence of these
local factors, so states are propagated without ever forming the 16x16
matrix; :attr:`ElementOp.matrix` gives the dense operator when needed.

Conventions:

* PBS reflects ``H`` (mode kept) and transmits ``V`` (mode swapped), with no
  extra phases; it is a CNOT with polarization as control.
* HWP with fast axis at ``theta``: ``[[cos 2t, sin 2t], [sin 2t, -cos 2t]]``.
* QWP with fast axis at ``theta``: ``R(t) diag(1, i) R(-t)``.
* BS: ``a -> (a + b)/sqrt2``, ``b -> (a - b)/sqrt2`` (real, asymmetric).
* Wave-plate matrices are periodic in the axis angle with period pi; angles
  outside ``[-pi/2, pi/2)`` are reduced into it.
"""

import math
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._validation import ATOL, check_angle, check_photon, check_state
from .hilbert import DIM

_I2 = np.eye(2, dtype=np.complex128)
_I4 = np.eye(4, dtype=np.complex128)
_PROJ = {"a": np.diag([1.0, 0.0]).astype(np.complex128), "b": np.diag([0.0, 1.0]).astype(np.complex128)}
MODES = ("a", "b", "both")

CATALOG = {
    # name: (needs mode, needs angle)
    "pbs": (False, False),
    "bs": (False, False),
    "pa45": (False, False),
    "hwp": (True, True),
    "qwp": (True, True),
    "phase": (True, True),
}


@dataclass(frozen=True)
class ElementSpec:
    """One line of a circuit: element name, target photon and parameters."""

    name: str
    photon: int
    mode: Optional[str] = None
    angle: Optional[float] = None

    def __post_init__(self):
        if self.name not in CATALOG:
            raise ValueError(f"unknown element {self.name!r}; known: {sorted(CATALOG)}")
        check_photon(self.photon)
        needs_mode, needs_angle = CATALOG[self.name]
        if needs_mode != (self.mode is not None) or needs_angle != (self.angle is not None):
            raise ValueError(f"element {self.name!r} takes mode={needs_mode}, angle={needs_angle}")
        if self.mode is not None and self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.angle is not None:
            a = check_angle(self.angle)
            if not -math.pi < a <= math.pi:
                raise ValueError(f"angle {a!r} outside (-pi, pi]")

    def to_text(self):
        parts = [self.name, str(self.photon)]
        if self.mode is not None:
            parts.append(self.mode)
        if self.angle is not None:
            parts.append(repr(float(self.angle)))
        return " ".join(parts)

    def build(self):
        if self.name == "pbs":
            return pbs(self.photon)
        if self.name == "bs":
            return beamsplitter(self.photon)
        if self.name == "pa45":
            return pa_45(self.photon)
        if self.name == "hwp":
            return hwp(self.photon, self.mode, self.angle)
        if self.name == "qwp":
            return qwp(self.photon, self.mode, self.angle)
        return mode_phase(self.photon, self.mode, self.angle)


@dataclass(frozen=True, eq=False)
class ElementOp:
    """A unitary on the 16-dim space stored as an ordered list of local steps.

    ``steps`` holds ``(photon, U)`` pairs with ``U`` a 4x4 unitary, applied
    first to last. ``description`` lists the element specs that produced it.
    """

    steps: tuple
    description: tuple

    @property
    def matrix(self):
        m = np.eye(DIM, dtype=np.complex128)
        for photon, u in self.steps:
            m = embed(photon, u) @ m
        return m

    def __repr__(self):
        return f"ElementOp({'; '.join(s.to_text() for s in self.description) or 'identity'})"


class CircuitParseError(ValueError):
    def __init__(self, message, line, column):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def embed(photon, u):
    """Dense 16x16 form of a photon-local 4x4 operator."""
    return np.kron(u, _I4) if photon == 1 else np.kron(_I4, u)


def _local(photon, u, spec):
    u = np.asarray(u, dtype=np.complex128)
    u.flags.writeable = False
    return ElementOp(steps=((photon, u),), description=(spec,))


def _reduce_axis(theta):
    if -math.pi / 2 <= theta < math.pi / 2:
        return theta
    return (theta + math.pi / 2) % math.pi - math.pi / 2


def _on_modes(jones, mode):
    if mode == "both":
        return np.kron(jones, _I2)
    other = "b" if mode == "a" else "a"
    return np.kron(jones, _PROJ[mode]) + np.kron(_I2, _PROJ[other])


def _rotation(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def hwp_jones(theta):
    c, s = math.cos(2 * theta), math.sin(2 * theta)
    return np.array([[c, s], [s, -c]], dtype=np.complex128)


def qwp_jones(theta):
    return _rotation(theta) @ np.diag([1.0, 1j]) @ _rotation(-theta)


def identity():
    return ElementOp(steps=(), description=())


def pbs(photon):
    """Polarizing beam splitter on one photon: ``V`` swaps a<->b, ``H`` stays."""
    photon = check_photon(photon)
    u = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128)
    return _local(photon, u, ElementSpec("pbs", photon))


def hwp(photon, mode, angle):
    """Half-wave plate with axis at ``angle`` placed in ``mode`` (a, b or both)."""
    photon = check_photon(photon)
    theta = _reduce_axis(check_angle(angle))
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return _local(photon, _on_modes(hwp_jones(theta), mode), ElementSpec("hwp", photon, mode, theta))


def qwp(photon, mode, angle):
    photon = check_photon(photon)
    theta = _reduce_axis(check_angle(angle))
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return _local(photon, _on_modes(qwp_jones(theta), mode), ElementSpec("qwp", photon, mode, theta))


def beamsplitter(photon):
    photon = check_photon(photon)
    bs = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2.0)
    return _local(photon, np.kron(_I2, bs), ElementSpec("bs", photon))


def mode_phase(photon=1, mode="b", alpha=0.0):
    """Multiply amplitudes with ``photon`` in ``mode`` by ``exp(i*alpha)``.

    The defaults put the phase on photon 1's mode ``b``, which turns
    ``(|ab> + |ba>)/sqrt2`` into ``(|ab> + e^{i alpha}|ba>)/sqrt2``.
    """
    photon = check_photon(photon)
    alpha = check_angle(alpha, "alpha")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    phase = np.exp(1j * alpha)
    if mode == "both":
        u = phase * _I4
    else:
        u = np.kron(_I2, _PROJ[mode] * phase + _PROJ["b" if mode == "a" else "a"])
    spec_alpha = math.remainder(alpha, 2 * math.pi)
    if spec_alpha == -math.pi:
        spec_alpha = math.pi
    return _local(photon, u, ElementSpec("phase", photon, mode, spec_alpha))


def pa_45(photon):
    """Rotation taking the +/-45 degree basis onto H/V in both modes.

    This is the half-wave plate at 22.5 degrees of a +/-45 polarization
    analyzer; the H/V split that follows is the detection itself, with
    ``H`` read as ``+`` and ``V`` as ``-``.
    """
    photon = check_photon(photon)
    op = hwp(photon, "both", math.pi / 8)
    return ElementOp(steps=op.steps, description=(ElementSpec("pa45", photon),))


def compose(ops):
    """Single operator applying ``ops`` in list order (first element acts first)."""
    ops = list(ops)
    if not ops:
        raise ValueError("compose needs at least one element")
    steps, desc = [], []
    for op in ops:
        steps.extend(op.steps)
        desc.extend(op.description)
    return ElementOp(steps=tuple(steps), description=tuple(desc))


def apply(op, psi):
    """Propagate a normalised 16-amplitude state through ``op``."""
    psi = check_state(psi)
    m = psi.reshape(4, 4)
    for photon, u in op.steps:
        m = u @ m if photon == 1 else m @ u.T
    out = m.reshape(DIM).copy()
    norm2 = float(np.vdot(out, out).real)
    if abs(norm2 - 1.0) > ATOL:
        raise RuntimeError(f"norm drifted to {norm2!r} applying {op!r}")
    out.flags.writeable = False
    return out


def apply_batch(op, X):
    """Row-wise :func:`apply` for an ``(n, 16)`` array (no norm checks)."""
    m = np.asarray(X, dtype=np.complex128).reshape(-1, 4, 4)
    for photon, u in op.steps:
        m = np.einsum("ij,njk->nik", u, m) if photon == 1 else np.einsum("nij,kj->nik", m, u)
    return m.reshape(-1, DIM)


_TOKEN = re.compile(r"\S+")


@dataclass(frozen=True)
class CircuitDescription:
    """Ordered element list with a line-oriented text form.

    One element per line: ``name photon [mode] [angle_rad]``. Blank lines and
    ``#`` comments are ignored.
    """

    elements: tuple

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))

    def build(self):
        return compose(spec.build() for spec in self.elements)

    def to_text(self):
        return "".join(spec.to_text() + "\n" for spec in self.elements)

    @classmethod
    def from_ops(cls, ops):
        return cls(tuple(d for op in ops for d in op.description))

    @classmethod
    def from_text(cls, text):
        specs = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0]
            tokens = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(line)]
            if not tokens:
                continue
            specs.append(_parse_line(tokens, lineno))
        if not specs:
            raise CircuitParseError("circuit has no elements", 1, 1)
        return cls(tuple(specs))


def _parse_line(tokens, lineno):
    (name, col), rest = tokens[0], tokens[1:]
    if name not in CATALOG:
        raise CircuitParseError(f"unknown element {name!r}", lineno, col)
    needs_mode, needs_angle = CATALOG[name]
    expected = 1 + needs_mode + needs_angle
    if len(rest) != expected:
        end_col = rest[-1][1] if rest else col
        raise CircuitParseError(
            f"{name!r} expects {expected} argument(s), got {len(rest)}", lineno, end_col
        )
    tok, tcol = rest[0]
    if tok not in ("1", "2"):
        raise CircuitParseError(f"photon must be 1 or 2, got {tok!r}", lineno, tcol)
    photon = int(tok)
    mode = angle = None
    if needs_mode:
        tok, tcol = rest[1]
        if tok not in MODES:
            raise CircuitParseError(f"mode must be one of {MODES}, got {tok!r}", lineno, tcol)
        mode = tok
    if needs_angle:
        tok, tcol = rest[2]
        try:
            angle = float(tok)
        except ValueError:
            raise CircuitParseError(f"bad angle {tok!r}", lineno, tcol) from None
        if not (math.isfinite(angle) and -math.pi < angle <= math.pi):
            raise CircuitParseError(f"angle {tok} outside (-pi, pi]", lineno, tcol)
    return ElementSpec(name, photon, mode, angle)
