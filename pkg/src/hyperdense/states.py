"""Two-photon states hyperentangled in polarization and orbital angular momentum.

Basis conventions, fixed across the whole package:

* Polarization (spin) basis per photon: (H, V) -> indices (0, 1).
* Orbital (OAM) basis per photon: (l, r) -> indices (0, 1), where l and
  r are the left/right-handed orbital modes.
* A full two-photon state lives in a 16-dim space with subsystem order
  (photon1 spin, photon1 orbit, photon2 spin, photon2 orbit); the basis
  index is s1*8 + o1*4 + s2*2 + o2.
* Pair bases for the separate degrees of freedom: spin pairs are
  (HH, HV, VH, VV), orbit pairs are (ll, lr, rl, rr), index = first*2 + second.

The ideal source emits (|HH> - |VV>)/sqrt(2) in spin together with
(|lr> + |rl>)/sqrt(2) in orbit.  Messages are encoded by the sender as
Pauli operations on the spin of photon 2 only; the orbital state is
never touched and serves as the ancilla that makes the four spin Bell
states distinguishable at the receiver.

Single-photon spin-orbit Bell states, used as the analysis basis:

    phi+- = (|H l> +- |V r>)/sqrt(2)
    psi+- = (|H r> +- |V l>)/sqrt(2)

Each encoded two-photon state is supported on exactly four of the 16
spin-orbit pair products, with amplitudes of magnitude 1/2; the pair
sets partition the 16 products into the four messages (signature_map).
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .linalg import (
    basis_ket,
    density_from_ket,
    tensor_product,
    validate_density_matrix,
)

_SQRT2 = math.sqrt(2.0)

_PAULI_I = np.eye(2, dtype=complex)
_PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


class Message(enum.IntEnum):
    """The four superdense-coding messages, in canonical order."""

    PHI_PLUS = 0
    PHI_MINUS = 1
    PSI_PLUS = 2
    PSI_MINUS = 3

    @property
    def label(self) -> str:
        return _MESSAGE_LABELS[self]

    @classmethod
    def from_label(cls, label: str) -> "Message":
        for m in cls:
            if _MESSAGE_LABELS[m] == label:
                return m
        raise ValueError(f"unknown message label {label!r}, expected one of "
                         f"{[_MESSAGE_LABELS[m] for m in cls]}")


_MESSAGE_LABELS = {
    Message.PHI_PLUS: "Phi+",
    Message.PHI_MINUS: "Phi-",
    Message.PSI_PLUS: "Psi+",
    Message.PSI_MINUS: "Psi-",
}

MESSAGES = tuple(Message)


class SpinOrbitBellLabel(enum.IntEnum):
    """Single-photon spin-orbit Bell states, in canonical order."""

    PHI_PLUS = 0
    PHI_MINUS = 1
    PSI_PLUS = 2
    PSI_MINUS = 3

    @property
    def label(self) -> str:
        return _BELL_LABELS[self]

    @property
    def ascii(self) -> str:
        # f/y stand in for phi/psi in CSV headers
        return _BELL_ASCII[self]


_BELL_LABELS = {
    SpinOrbitBellLabel.PHI_PLUS: "phi+",
    SpinOrbitBellLabel.PHI_MINUS: "phi-",
    SpinOrbitBellLabel.PSI_PLUS: "psi+",
    SpinOrbitBellLabel.PSI_MINUS: "psi-",
}

_BELL_ASCII = {
    SpinOrbitBellLabel.PHI_PLUS: "f+",
    SpinOrbitBellLabel.PHI_MINUS: "f-",
    SpinOrbitBellLabel.PSI_PLUS: "y+",
    SpinOrbitBellLabel.PSI_MINUS: "y-",
}

BELL_LABELS = tuple(SpinOrbitBellLabel)

# All 16 (photon1, photon2) spin-orbit Bell pairs in canonical order:
# photon-1 label major, photon-2 label minor.
BELL_PAIRS = tuple(itertools.product(BELL_LABELS, BELL_LABELS))


@dataclass(frozen=True)
class SourceParams:
    """Source imperfection knobs.  Angles in radians, lambdas in [0, 1].

    eps_theta tilts the amplitude balance away from 1/sqrt(2), eps_phi
    adds a relative phase between the two terms, lambda mixes in white
    noise on the corresponding photon-pair degree of freedom.
    """

    eps_theta_spin: float = 0.0
    eps_phi_spin: float = 0.0
    lambda_spin: float = 0.0
    eps_theta_orbit: float = 0.0
    eps_phi_orbit: float = 0.0
    lambda_orbit: float = 0.0

    def __post_init__(self):
        for name in ("eps_theta_spin", "eps_phi_spin", "eps_theta_orbit",
                     "eps_phi_orbit"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        for name in ("lambda_spin", "lambda_orbit"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")


def model_spin_state(eps_theta: float, eps_phi: float) -> np.ndarray:
    """Imperfect spin pair ket cos(pi/4+t)|HH> - e^(i p) sin(pi/4+t)|VV>."""
    theta = math.pi / 4.0 + eps_theta
    psi = np.zeros(4, dtype=complex)
    psi[0] = math.cos(theta)
    psi[3] = -np.exp(1j * eps_phi) * math.sin(theta)
    return psi


def model_orbit_state(eps_theta: float, eps_phi: float) -> np.ndarray:
    """Imperfect orbit pair ket cos(pi/4+t)|lr> + e^(i p) sin(pi/4+t)|rl>."""
    theta = math.pi / 4.0 + eps_theta
    psi = np.zeros(4, dtype=complex)
    psi[1] = math.cos(theta)
    psi[2] = np.exp(1j * eps_phi) * math.sin(theta)
    return psi


def depolarize(rho: np.ndarray, lam: float) -> np.ndarray:
    """White-noise channel (1-lam)*rho + lam*I/d, trace preserving."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"depolarization weight must lie in [0, 1], got {lam}")
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    return (1.0 - lam) * rho + lam * np.eye(d, dtype=complex) / d


def _interleave_ket(psi: np.ndarray) -> np.ndarray:
    # (s1, s2, o1, o2) -> (s1, o1, s2, o2)
    return psi.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(16)


def _interleave_matrix(mat: np.ndarray) -> np.ndarray:
    t = mat.reshape(2, 2, 2, 2, 2, 2, 2, 2)
    t = t.transpose(0, 2, 1, 3, 4, 6, 5, 7)
    return t.reshape(16, 16)


def ideal_source() -> np.ndarray:
    """Density matrix of the perfect hyperentangled source (pure, 16x16)."""
    spin = model_spin_state(0.0, 0.0)
    orbit = model_orbit_state(0.0, 0.0)
    return density_from_ket(_interleave_ket(tensor_product(spin, orbit)))


def build_source(params: SourceParams) -> np.ndarray:
    """Source state with tilt, phase and white-noise imperfections applied.

    The spin and orbit pair states are prepared independently and
    depolarized with their own weights, then combined into the common
    16-dim ordering.
    """
    rho_spin = depolarize(
        density_from_ket(model_spin_state(params.eps_theta_spin,
                                          params.eps_phi_spin)),
        params.lambda_spin,
    )
    rho_orbit = depolarize(
        density_from_ket(model_orbit_state(params.eps_theta_orbit,
                                           params.eps_phi_orbit)),
        params.lambda_orbit,
    )
    return _interleave_matrix(tensor_product(rho_spin, rho_orbit))


_ENCODING_OPS = {
    Message.PHI_MINUS: _PAULI_I,
    Message.PHI_PLUS: _PAULI_Z,
    Message.PSI_MINUS: _PAULI_X,
    Message.PSI_PLUS: _PAULI_X @ _PAULI_Z,
}


def encoding_operator(message: Message) -> np.ndarray:
    """16x16 unitary the sender applies: a Pauli on photon-2 spin only."""
    pauli = _ENCODING_OPS[Message(message)]
    return tensor_product(np.eye(4, dtype=complex),
                          tensor_product(pauli, np.eye(2, dtype=complex)))


def encode(rho: np.ndarray, message: Message) -> np.ndarray:
    """Apply the sender's Pauli operation for `message` to the source state."""
    k = encoding_operator(message)
    return k @ np.asarray(rho, dtype=complex) @ k.conj().T


def encoded_ket(message: Message) -> np.ndarray:
    """Pure state the receiver sees when `message` rides the ideal source."""
    spin = model_spin_state(0.0, 0.0)
    orbit = model_orbit_state(0.0, 0.0)
    psi = _interleave_ket(tensor_product(spin, orbit))
    return encoding_operator(message) @ psi


def spin_orbit_bell_ket(label: SpinOrbitBellLabel) -> np.ndarray:
    """Single-photon spin-orbit Bell ket in the (Hl, Hr, Vl, Vr) basis."""
    label = SpinOrbitBellLabel(label)
    if label == SpinOrbitBellLabel.PHI_PLUS:
        return (basis_ket(4, 0) + basis_ket(4, 3)) / _SQRT2
    if label == SpinOrbitBellLabel.PHI_MINUS:
        return (basis_ket(4, 0) - basis_ket(4, 3)) / _SQRT2
    if label == SpinOrbitBellLabel.PSI_PLUS:
        return (basis_ket(4, 1) + basis_ket(4, 2)) / _SQRT2
    return (basis_ket(4, 1) - basis_ket(4, 2)) / _SQRT2


def bell_pair_ket(label1: SpinOrbitBellLabel,
                  label2: SpinOrbitBellLabel) -> np.ndarray:
    """Two-photon product of single-photon spin-orbit Bell kets (16-dim)."""
    return tensor_product(spin_orbit_bell_ket(label1),
                          spin_orbit_bell_ket(label2))


def spin_orbit_decompose(psi: np.ndarray) -> np.ndarray:
    """Amplitudes of a 16-dim ket in the spin-orbit Bell pair basis.

    Returns a (4, 4) complex array indexed [photon1 label, photon2 label]
    with SpinOrbitBellLabel values as indices.
    """
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.shape != (16,):
        raise ValueError(f"expected a 16-dim ket, got shape {psi.shape}")
    amps = np.zeros((4, 4), dtype=complex)
    for l1, l2 in BELL_PAIRS:
        amps[l1, l2] = bell_pair_ket(l1, l2).conj() @ psi
    return amps


_SIGNATURE_MAP = {
    Message.PHI_PLUS: (
        (SpinOrbitBellLabel.PHI_PLUS, SpinOrbitBellLabel.PSI_PLUS),
        (SpinOrbitBellLabel.PHI_MINUS, SpinOrbitBellLabel.PSI_MINUS),
        (SpinOrbitBellLabel.PSI_PLUS, SpinOrbitBellLabel.PHI_PLUS),
        (SpinOrbitBellLabel.PSI_MINUS, SpinOrbitBellLabel.PHI_MINUS),
    ),
    Message.PHI_MINUS: (
        (SpinOrbitBellLabel.PHI_PLUS, SpinOrbitBellLabel.PSI_MINUS),
        (SpinOrbitBellLabel.PHI_MINUS, SpinOrbitBellLabel.PSI_PLUS),
        (SpinOrbitBellLabel.PSI_PLUS, SpinOrbitBellLabel.PHI_MINUS),
        (SpinOrbitBellLabel.PSI_MINUS, SpinOrbitBellLabel.PHI_PLUS),
    ),
    Message.PSI_PLUS: (
        (SpinOrbitBellLabel.PHI_PLUS, SpinOrbitBellLabel.PHI_PLUS),
        (SpinOrbitBellLabel.PHI_MINUS, SpinOrbitBellLabel.PHI_MINUS),
        (SpinOrbitBellLabel.PSI_PLUS, SpinOrbitBellLabel.PSI_PLUS),
        (SpinOrbitBellLabel.PSI_MINUS, SpinOrbitBellLabel.PSI_MINUS),
    ),
    Message.PSI_MINUS: (
        (SpinOrbitBellLabel.PHI_PLUS, SpinOrbitBellLabel.PHI_MINUS),
        (SpinOrbitBellLabel.PHI_MINUS, SpinOrbitBellLabel.PHI_PLUS),
        (SpinOrbitBellLabel.PSI_PLUS, SpinOrbitBellLabel.PSI_MINUS),
        (SpinOrbitBellLabel.PSI_MINUS, SpinOrbitBellLabel.PSI_PLUS),
    ),
}


def signature_map(message: Message) -> frozenset:
    """Set of four (photon1, photon2) Bell pairs that identify `message`.

    The four sets are disjoint and together cover all 16 pairs, so each
    detected pair points to exactly one message.
    """
    return frozenset(_SIGNATURE_MAP[Message(message)])


def message_of_pair(label1: SpinOrbitBellLabel,
                    label2: SpinOrbitBellLabel) -> Message:
    """The message whose signature set contains the given detected pair."""
    for m in MESSAGES:
        if (label1, label2) in _SIGNATURE_MAP[m]:
            return m
    raise AssertionError("signature sets must cover all pairs")


def spin_marginal(rho: np.ndarray) -> np.ndarray:
    """Reduced 4x4 state of the two spins, orbit traced out (HH, HV, VH, VV)."""
    t = np.asarray(rho, dtype=complex).reshape([2] * 8)
    out = np.einsum(t, [0, 1, 2, 3, 4, 1, 6, 3], [0, 2, 4, 6])
    return out.reshape(4, 4)


def orbit_marginal(rho: np.ndarray) -> np.ndarray:
    """Reduced 4x4 state of the two orbital modes, spin traced out."""
    t = np.asarray(rho, dtype=complex).reshape([2] * 8)
    out = np.einsum(t, [0, 1, 2, 3, 0, 5, 2, 7], [1, 3, 5, 7])
    return out.reshape(4, 4)


# --- model fitting ---------------------------------------------------------

@dataclass(frozen=True)
class FitResult:
    eps_theta: float
    eps_phi: float
    lam: float
    fidelity: float
    converged: bool


def _mixed_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    # (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 via eigendecompositions
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    sqrt_rho = (v * np.sqrt(w)) @ v.conj().T
    inner = np.linalg.eigvalsh(sqrt_rho @ sigma @ sqrt_rho)
    inner = np.clip(inner, 0.0, None)
    return float(np.sum(np.sqrt(inner)) ** 2)


_FIT_GRID_THETA = (-0.15, 0.0, 0.15)
_FIT_GRID_PHI = (-2.0, 0.0, 2.0)
_FIT_GRID_LAM = (0.05, 0.45, 0.9)


def fit_model_params(rho: np.ndarray, which: str = "spin") -> FitResult:
    """Fit (eps_theta, eps_phi, lam) of the depolarized model to a 4x4 state.

    Parameters
    ----------
    rho : (4, 4) density matrix of a spin or orbit photon pair.
    which : "spin" or "orbit", selecting the model ket family.

    Maximizes the fidelity between depolarize(|model>, lam) and rho with
    Nelder-Mead, restarted from a coarse 3x3x3 grid in addition to the
    default start (0, 0, 0.01).  The relative phase is unidentifiable in
    the fully mixed limit, so eps_phi is reported as 0 when lam is
    within 1e-6 of 1.  eps_phi is wrapped into (-pi, pi].
    """
    rho = validate_density_matrix(rho)
    if rho.shape != (4, 4):
        raise ValueError(f"fit expects a 4x4 state, got shape {rho.shape}")
    if which == "spin":
        model = model_spin_state
    elif which == "orbit":
        model = model_orbit_state
    else:
        raise ValueError(f"which must be 'spin' or 'orbit', got {which!r}")

    def negative_fidelity(x):
        sigma = depolarize(density_from_ket(model(x[0], x[1])), x[2])
        return -_mixed_fidelity(rho, sigma)

    bounds = [(-math.pi / 4, math.pi / 4), (-math.pi, math.pi), (0.0, 1.0)]
    starts = [(0.0, 0.0, 0.01)]
    starts += list(itertools.product(_FIT_GRID_THETA, _FIT_GRID_PHI,
                                     _FIT_GRID_LAM))

    best = None
    for x0 in starts:
        res = minimize(negative_fidelity, x0, method="Nelder-Mead",
                       bounds=bounds,
                       options={"xatol": 1e-7, "fatol": 1e-10,
                                "maxiter": 4000})
        if best is None or res.fun < best.fun:
            best = res

    eps_theta, eps_phi, lam = best.x
    lam = min(max(lam, 0.0), 1.0)
    eps_phi = math.remainder(eps_phi, 2.0 * math.pi)
    if eps_phi <= -math.pi:
        eps_phi = math.pi
    if 1.0 - lam < 1e-6:
        eps_phi = 0.0
    return FitResult(eps_theta=float(eps_theta), eps_phi=float(eps_phi),
                     lam=float(lam), fidelity=float(-best.fun),
                     converged=bool(best.success))
