"""Idiotypic network dynamics: concentration evolution and antibody selection.

The network couples antibodies through complementary bit-string matching.
Concentrations follow a rate equation with four terms, each gated by the
focal antibody's own concentration (no collisions at zero concentration):

    dx_i/dt = c * [  sum_j m_ag[j,i] * x_i * y_j        (antigen stimulation)
                   - k1 * sum_j m_ab[i,j] * x_i * x_j   (interantibody suppression)
                   + sum_j m_ab[j,i] * x_i * x_j        (interantibody stimulation)
                  ] - k2 * x_i                          (damping)

where ``m_ab[j, i]`` scores antibody i's paratope against antibody j's
idiotope and ``m_ag[j, i]`` scores it against antigen j's epitope. After
every explicit-Euler step all concentrations are squashed back into (0, 1).

The stimulation/suppression affinity-update layer works on real matrices
instead: a paratope matrix P (affinity of antibody i for antigen v), a
fixed idiotope matrix I (belief that a combination is poor) and pairing
weights X. Antibodies similar to the antigenic one gain affinity, the
dissimilar lose it, and selection picks the highest concentration-times-
affinity activation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ais_kit import kernels
from ais_kit.affinity import MatchConfig, as_bits
from ais_kit.errors import ConfigError

__all__ = [
    "NetworkAntibody",
    "AntigenPattern",
    "FarmerParams",
    "MatchMatrices",
    "NetworkState",
    "build_match_matrix",
    "farmer_derivative",
    "squash",
    "step",
    "select_by_concentration",
    "select_antigenic",
    "pairing_weights",
    "stimulation",
    "suppression",
    "update_affinity",
    "select_by_activation",
]


@dataclass
class NetworkAntibody:
    """Paratope/idiotope pair with a live concentration and optional action tag."""

    paratope: np.ndarray
    idiotope: np.ndarray
    concentration: float
    action_label: str | None = None

    def __post_init__(self):
        self.paratope = as_bits(self.paratope)
        self.idiotope = as_bits(self.idiotope)
        if not 0.0 < self.concentration < 1.0:
            raise ConfigError(
                f"antibody concentration must lie strictly in (0, 1), got {self.concentration}"
            )


@dataclass
class AntigenPattern:
    epitope: np.ndarray
    concentration: float = 1.0

    def __post_init__(self):
        self.epitope = as_bits(self.epitope)
        if not (np.isfinite(self.concentration) and self.concentration >= 0):
            raise ConfigError("antigen concentration must be finite and >= 0")


@dataclass(frozen=True)
class FarmerParams:
    c: float  # collision/production rate
    k1: float  # suppression-vs-stimulation inequality factor
    k2: float  # damping (death) rate
    dt: float  # Euler step
    squash_theta: float = 0.5

    def __post_init__(self):
        if self.c <= 0:
            raise ConfigError("c must be > 0")
        if self.k1 < 0 or self.k2 < 0:
            raise ConfigError("k1 and k2 must be >= 0")
        if self.dt < 0:
            raise ConfigError("dt must be >= 0")


class MatchMatrices(NamedTuple):
    """Integer reaction strengths; rows index epitope owners, columns paratope owners."""

    antibody: np.ndarray  # (N, N): antibody idiotopes x antibody paratopes
    antigen: np.ndarray  # (n, N): antigen epitopes x antibody paratopes


@dataclass
class NetworkState:
    x: np.ndarray  # antibody concentrations, each in (0, 1)
    y: np.ndarray  # antigen concentrations, >= 0
    m: MatchMatrices

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        n_ab = self.m.antibody.shape[0]
        if self.m.antibody.shape != (n_ab, n_ab) or self.x.shape != (n_ab,):
            raise ConfigError("antibody match matrix must be square and match x")
        if self.m.antigen.shape != (self.y.shape[0], n_ab):
            raise ConfigError("antigen match matrix shape must be (n_antigens, n_antibodies)")


def build_match_matrix(
    antibodies: list[NetworkAntibody],
    antigens: list[AntigenPattern],
    cfg: MatchConfig,
) -> MatchMatrices:
    """Score every paratope against every antibody idiotope and antigen epitope."""
    if not antibodies:
        raise ConfigError("network needs at least one antibody")
    paratopes = np.stack([ab.paratope for ab in antibodies])
    idiotopes = np.stack([ab.idiotope for ab in antibodies])
    lengths = {paratopes.shape[1], idiotopes.shape[1]} | {ag.epitope.size for ag in antigens}
    if len(lengths) != 1:
        raise ConfigError(f"mixed string lengths in network: {sorted(lengths)}")
    cfg.validate_length(paratopes.shape[1])
    mo = cfg.resolved_min_overlap()
    m_ab = kernels.reaction_matrix(idiotopes, paratopes, cfg.s, mo, cfg.shifted)
    if antigens:
        epitopes = np.stack([ag.epitope for ag in antigens])
        m_ag = kernels.reaction_matrix(epitopes, paratopes, cfg.s, mo, cfg.shifted)
    else:
        m_ag = np.zeros((0, len(antibodies)), dtype=np.int64)
    return MatchMatrices(antibody=m_ab, antigen=m_ag)


def farmer_derivative(x, y, m: MatchMatrices, params: FarmerParams) -> np.ndarray:
    """Concentration rate of change for every antibody (see module formula)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ConfigError("non-finite concentrations")
    if m.antibody.shape != (x.size, x.size) or m.antigen.shape != (y.size, x.size):
        raise ConfigError("match matrix dimensions do not fit the state")
    antigen_stim = x * (m.antigen.T @ y)
    suppression_term = x * (m.antibody @ x)
    stimulation_term = x * (m.antibody.T @ x)
    return (
        params.c * (antigen_stim - params.k1 * suppression_term + stimulation_term)
        - params.k2 * x
    )


def squash(x_raw, theta: float = 0.5):
    """Logistic squeeze into (0, 1): ``1 / (1 + exp(theta - x_raw))``."""
    return 1.0 / (1.0 + np.exp(theta - np.asarray(x_raw, dtype=float)))


def step(state: NetworkState, params: FarmerParams) -> NetworkState:
    """One explicit-Euler update followed by squashing of every concentration.

    The squash is applied every step (including ``dt == 0``), so the
    returned concentrations always lie strictly inside (0, 1). A non-finite
    intermediate raises instead of being clamped.
    """
    dx = farmer_derivative(state.x, state.y, state.m, params)
    raw = state.x + params.dt * dx
    if not np.isfinite(raw).all():
        raise ValueError("non-finite concentration produced by Euler update")
    return NetworkState(x=squash(raw, params.squash_theta), y=state.y, m=state.m)


def select_by_concentration(state: NetworkState | np.ndarray) -> int:
    """Index of the highest concentration; ties go to the lowest index."""
    x = state.x if isinstance(state, NetworkState) else np.asarray(state)
    if x.size == 0:
        raise ConfigError("empty network")
    return int(np.argmax(x))


def _check_column(P: np.ndarray, v: int) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    if P.ndim != 2:
        raise ConfigError("paratope matrix must be 2-D")
    if not 0 <= v < P.shape[1]:
        raise ConfigError(f"antigen index {v} out of range for {P.shape[1]} antigens")
    return P


def select_antigenic(P, v: int) -> int:
    """Antibody with the highest paratope affinity for antigen ``v`` (ties: lowest index)."""
    P = _check_column(P, v)
    return int(np.argmax(P[:, v]))


def pairing_weights(x, n_antigens: int) -> np.ndarray:
    """Default pairing-weight matrix: every antigen slot weighted by the
    antibody's current concentration."""
    x = np.asarray(x, dtype=float)
    return np.repeat(x[:, None], n_antigens, axis=1)


def _check_pis(P, I, X):
    P, I, X = (np.asarray(a, dtype=float) for a in (P, I, X))
    if not (P.shape == I.shape == X.shape) or P.ndim != 2:
        raise ConfigError("P, I and X must share one 2-D shape")
    return P, I, X


def stimulation(P, I, X, r: int, idiotope_source: str = "antigenic") -> np.ndarray:
    """Affinity increases earned by similarity to the antigenic antibody ``r``.

    ``eps[i] = sum_j (1 - P[i, j]) * I[r, j] * X[i, j] * X[r, j]``.

    ``idiotope_source`` selects whose idiotope row drives the comparison:
    ``"antigenic"`` (row ``r``, the default) or ``"own"`` (each antibody's
    row ``i``).
    """
    P, I, X = _check_pis(P, I, X)
    if not 0 <= r < P.shape[0]:
        raise ConfigError(f"antibody index {r} out of range")
    if idiotope_source == "antigenic":
        idi = I[r][None, :]
    elif idiotope_source == "own":
        idi = I
    else:
        raise ConfigError(f"unknown idiotope_source {idiotope_source!r}")
    return ((1.0 - P) * idi * X * X[r][None, :]).sum(axis=1)


def suppression(P, I, X, r: int, k1: float) -> np.ndarray:
    """Affinity decreases from dissimilarity to the antigenic antibody ``r``.

    ``delta[i] = k1 * sum_j P[r, j] * I[i, j] * X[i, j] * X[r, j]``.
    """
    P, I, X = _check_pis(P, I, X)
    if not 0 <= r < P.shape[0]:
        raise ConfigError(f"antibody index {r} out of range")
    return k1 * (P[r][None, :] * I * X * X[r][None, :]).sum(axis=1)


def update_affinity(P, eps, delta, v: int) -> np.ndarray:
    """Apply stimulation/suppression to column ``v`` only, clamped into [0, 1].

    The net change is formed first, so equal stimulation and suppression
    leave the column bit-for-bit unchanged.
    """
    P = _check_column(P, v).copy()
    P[:, v] = np.clip(P[:, v] + (np.asarray(eps) - np.asarray(delta)), 0.0, 1.0)
    return P


def select_by_activation(x, P, v: int) -> tuple[int, bool]:
    """Pick the antibody with the highest concentration-times-affinity activation.

    Returns ``(index, idiotypic_difference)`` where the flag marks a
    selection differing from the antigenic antibody for ``v``.
    """
    P = _check_column(P, v)
    x = np.asarray(x, dtype=float)
    if x.size != P.shape[0]:
        raise ConfigError("concentration vector does not match P")
    selected = int(np.argmax(x * P[:, v]))
    return selected, selected != select_antigenic(P, v)
