"""Receiver optics: spin-orbit Bell-state analyzer and conditional detection.

Per photon the analyzer is a hologram followed by a polarizing beam
splitter (PBS).  The hologram converts the orbital mode into a path
(output port) while flipping a sign on the r mode:

    |H l> -> |H a>,   |H r> -> -|H b>,   |V l> -> |V a>,   |V r> -> -|V b>

The single-photon matrices are written in the (H a, H b, V a, V b)
basis, index = polarization*2 + port, with ports (a, b) identified
index-wise with the orbital modes (l, r).  A perfect PBS transmits H
and reflects V; crosstalk eps_H (eps_V) is the probability that the
wrong port is taken, and phi1/phi2 are reflection phases.  With ideal
parameters each spin-orbit Bell state exits in a definite port with a
definite diagonal polarization, so coincidence patterns between the two
photons' detectors identify the encoded message.

Detection is modeled by rank-4 projectors, one per message: the images
under the ideal two-photon analyzer of the message's four signature
pairs.  Their sum is the identity, so every detected event is assigned
to exactly one message and transfer-matrix columns sum to one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .states import (
    MESSAGES,
    Message,
    SourceParams,
    bell_pair_ket,
    build_source,
    encode,
    signature_map,
)

MESSAGE_LABELS = tuple(m.label for m in MESSAGES)

DEFAULT_ACCIDENTAL_FRACTION = 0.00267


@dataclass(frozen=True)
class GateParams:
    """PBS crosstalk probabilities and reflection phases (radians)."""

    eps_H: float = 0.0
    eps_V: float = 0.0
    phi1: float = 0.0
    phi2: float = 0.0

    def __post_init__(self):
        for name in ("eps_H", "eps_V"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        for name in ("phi1", "phi2"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class AccidentalModel:
    """Uniform accidental-coincidence admixture.

    A fraction of recorded coincidences is noise spread evenly over the
    four outcomes: p'(y|x) = (1-fraction)*p(y|x) + fraction/4.
    """

    fraction: float = DEFAULT_ACCIDENTAL_FRACTION

    def __post_init__(self):
        if not 0.0 <= self.fraction < 1.0:
            raise ValueError(
                f"accidental fraction must lie in [0, 1), got {self.fraction}")


@dataclass(frozen=True)
class TransferMatrix:
    """Column-stochastic conditional-detection matrix p(detected | sent).

    probabilities[y, x] is the probability of assigning message y when
    message x was sent; columns are indexed in the canonical message
    order and sum to one.
    """

    probabilities: np.ndarray
    labels: tuple = MESSAGE_LABELS

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        object.__setattr__(self, "probabilities", p)
        n = len(self.labels)
        if p.shape != (n, n):
            raise ValueError(
                f"expected a {n}x{n} matrix for {n} labels, got {p.shape}")
        if p.min() < -1e-12 or p.max() > 1.0 + 1e-12:
            raise ValueError("entries must be probabilities in [0, 1]")
        col = p.sum(axis=0)
        if np.max(np.abs(col - 1.0)) > 1e-9:
            raise ValueError(
                f"columns must sum to 1 within 1e-9, got {col}")

    @property
    def n(self) -> int:
        return len(self.labels)


def hologram_map() -> np.ndarray:
    """Single-photon hologram: (Hl, Hr, Vl, Vr) -> (Ha, Hb, Va, Vb)."""
    return np.diag([1.0, -1.0, 1.0, -1.0]).astype(complex)


def pbs_matrix(gate: GateParams) -> np.ndarray:
    """Single-photon PBS with crosstalk, block diagonal over polarization."""
    tH = math.sqrt(1.0 - gate.eps_H)
    rH = math.sqrt(gate.eps_H)
    tV = math.sqrt(1.0 - gate.eps_V)
    rV = math.sqrt(gate.eps_V)
    e1 = np.exp(1j * gate.phi1)
    e2 = np.exp(1j * gate.phi2)
    e12 = np.exp(0.5j * (gate.phi1 + gate.phi2))
    u = np.zeros((4, 4), dtype=complex)
    u[0:2, 0:2] = [[tH, -rH], [rH, tH]]
    u[2:4, 2:4] = [[e12 * rV, -e2 * tV], [e1 * tV, e12 * rV]]
    return u


def analyzer_unitary(gate: GateParams) -> np.ndarray:
    """Hologram followed by the PBS for one photon (4x4 unitary)."""
    return pbs_matrix(gate) @ hologram_map()


def two_photon_gate(gate: GateParams) -> np.ndarray:
    """Both photons analyzed independently: U x U on the 16-dim space."""
    u = analyzer_unitary(gate)
    return np.kron(u, u)


@lru_cache(maxsize=1)
def _detection_projectors_cached():
    u_ideal = two_photon_gate(GateParams())
    projectors = []
    for m in MESSAGES:
        p = np.zeros((16, 16), dtype=complex)
        for l1, l2 in sorted(signature_map(m)):
            v = u_ideal @ bell_pair_ket(l1, l2)
            p += np.outer(v, v.conj())
        projectors.append(p)
    return tuple(projectors)


def detection_projectors() -> tuple:
    """Rank-4 detection projectors, one per message in canonical order.

    Built from the ideal analyzer's images of the signature pairs, so
    with a perfect source and gate the transfer matrix is the identity.
    """
    return _detection_projectors_cached()


def transfer_matrix(source: SourceParams = SourceParams(),
                    gate: GateParams = GateParams()) -> TransferMatrix:
    """Conditional-detection probabilities for all sent messages.

    p(y|x) = Tr(P_y U rho_x U+) with rho_x the encoded source state and
    U the two-photon analyzer.  Columns are renormalized as a guard,
    which is a no-op while the projectors stay complete.
    """
    rho_source = build_source(source)
    u = two_photon_gate(gate)
    projectors = detection_projectors()
    p = np.zeros((4, 4))
    for x in MESSAGES:
        analyzed = u @ encode(rho_source, x) @ u.conj().T
        for y in MESSAGES:
            p[y, x] = np.einsum("ij,ji->", projectors[y], analyzed).real
    p = np.clip(p, 0.0, None)
    p /= p.sum(axis=0, keepdims=True)
    return TransferMatrix(p)


def apply_accidentals(t: TransferMatrix,
                      accidentals: AccidentalModel) -> TransferMatrix:
    """Mix a uniform accidental-coincidence floor into the matrix."""
    f = accidentals.fraction
    n = t.n
    p = (1.0 - f) * t.probabilities + f / n
    return TransferMatrix(p, t.labels)


# --- serialization ---------------------------------------------------------

def to_json_dict(t: TransferMatrix) -> dict:
    """JSON-ready dict; float values survive a round trip bit-exactly."""
    return {
        "n": t.n,
        "labels": list(t.labels),
        "p": [[float(v) for v in row] for row in t.probabilities],
    }


def from_json_dict(d: dict) -> TransferMatrix:
    required = {"n", "labels", "p"}
    missing = required - set(d)
    if missing:
        raise ValueError(f"transfer-matrix JSON is missing keys {sorted(missing)}")
    if len(d["labels"]) != d["n"]:
        raise ValueError("label count does not match n")
    return TransferMatrix(np.array(d["p"], dtype=float), tuple(d["labels"]))


def to_json(t: TransferMatrix) -> str:
    return json.dumps(to_json_dict(t), indent=2)


def from_json(text: str) -> TransferMatrix:
    return from_json_dict(json.loads(text))


def to_csv(t: TransferMatrix) -> str:
    """CSV with one row per detected message; 17 significant digits."""
    lines = ["detected," + ",".join(f"sent_{lab}" for lab in t.labels)]
    for y, lab in enumerate(t.labels):
        cells = ",".join(f"{v:.17g}" for v in t.probabilities[y])
        lines.append(f"{lab},{cells}")
    return "\n".join(lines) + "\n"


def from_csv(text: str) -> TransferMatrix:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if len(lines) < 2:
        raise ValueError("transfer-matrix CSV needs a header and data rows")
    header = lines[0].split(",")
    labels = tuple(c[len("sent_"):] for c in header[1:])
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        rows.append([float(c) for c in cells[1:]])
    return TransferMatrix(np.array(rows), labels)
