"""Network configuration types, fading primitives, and validation.

A network consists of K constellation types.  Each type places a Poisson
number of orbital planes (uniform longitude, sine-density inclination)
and a Poisson number of satellites per plane, all sharing one orbital
radius, transmit power, and antenna gain.  Gains enter computations as
linear factors; the config file surface and the CLI accept dB.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaincc

from .geometry import R_EARTH_KM


class ModelWarning(UserWarning):
    """Soft configuration issues that do not invalidate a model."""


def db_to_linear(value_db):
    return 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)


def linear_to_db(value):
    return 10.0 * np.log10(np.asarray(value, dtype=float))


@dataclass(frozen=True)
class ConstellationSpec:
    """One constellation type: orbit law plus link parameters.

    ``gain`` is the aggregate transmit/receive antenna gain of the
    serving link as a linear factor (use :func:`db_to_linear` to convert
    from dB).  Interfering satellites are received with unit gain.
    """

    mean_orbits: float
    mean_sats_per_orbit: float
    radius_km: float
    tx_power_w: float = 1.0
    gain: float = 1.0

    def __post_init__(self):
        if not (self.mean_orbits > 0 and math.isfinite(self.mean_orbits)):
            raise ValueError("mean_orbits must be positive and finite")
        if not (self.mean_sats_per_orbit > 0 and math.isfinite(self.mean_sats_per_orbit)):
            raise ValueError("mean_sats_per_orbit must be positive and finite")
        if not (self.radius_km > R_EARTH_KM and math.isfinite(self.radius_km)):
            raise ValueError(f"radius_km must exceed {R_EARTH_KM} (radius <= earth radius)")
        if not (self.tx_power_w > 0 and math.isfinite(self.tx_power_w)):
            raise ValueError("tx_power_w must be positive and finite")
        if not (self.gain >= 1 and math.isfinite(self.gain)):
            raise ValueError("gain must be >= 1 (linear aggregate gain)")

    @property
    def altitude_km(self) -> float:
        return self.radius_km - R_EARTH_KM

    @property
    def mean_satellites(self) -> float:
        return self.mean_orbits * self.mean_sats_per_orbit

    @property
    def eirp_w(self) -> float:
        return self.tx_power_w * self.gain


@dataclass(frozen=True)
class PropagationConfig:
    """Path loss, noise, and small-scale fading parameters.

    ``path_loss_exponent`` must exceed 2: at 2 the aggregate
    interference seen through the visible band diverges.  ``fading_shape``
    is the Nakagami shape of the power fading (1 = Rayleigh); analytic
    coverage is available for shape 1 only.
    """

    path_loss_exponent: float = 3.0
    noise_power_w: float = 0.0
    fading_shape: int = 1

    def __post_init__(self):
        if not (self.path_loss_exponent > 2 and math.isfinite(self.path_loss_exponent)):
            raise ValueError("path_loss_exponent must exceed 2")
        if not (self.noise_power_w >= 0 and math.isfinite(self.noise_power_w)):
            raise ValueError("noise_power_w must be nonnegative and finite")
        if self.fading_shape != int(self.fading_shape) or self.fading_shape < 1:
            raise ValueError("fading_shape must be a positive integer")


@dataclass(frozen=True)
class NetworkModel:
    constellations: tuple[ConstellationSpec, ...]
    propagation: PropagationConfig = field(default_factory=PropagationConfig)

    def __post_init__(self):
        object.__setattr__(self, "constellations", tuple(self.constellations))
        if len(self.constellations) == 0:
            raise ValueError("at least one constellation type is required")
        for c in self.constellations:
            if not isinstance(c, ConstellationSpec):
                raise TypeError("constellations must be ConstellationSpec instances")
        if not isinstance(self.propagation, PropagationConfig):
            raise TypeError("propagation must be a PropagationConfig")

    @property
    def n_types(self) -> int:
        return len(self.constellations)


@dataclass
class Curve:
    """A sampled function y(x) with optional pointwise standard errors."""

    x: np.ndarray
    y: np.ndarray
    stderr: np.ndarray | None = None

    def __post_init__(self):
        self.x = np.atleast_1d(np.asarray(self.x, dtype=float))
        self.y = np.atleast_1d(np.asarray(self.y, dtype=float))
        if self.stderr is not None:
            self.stderr = np.atleast_1d(np.asarray(self.stderr, dtype=float))
            if self.stderr.shape != self.x.shape:
                raise ValueError("stderr must match x in shape")
        if self.x.ndim != 1 or self.x.shape != self.y.shape:
            raise ValueError("x and y must be 1-d arrays of equal length")
        if np.any(np.diff(self.x) <= 0):
            raise ValueError("x must be strictly increasing")

    @classmethod
    def probability(cls, x, y, stderr=None) -> "Curve":
        curve = cls(x, y, stderr)
        if np.any(curve.y < -1e-12) or np.any(curve.y > 1 + 1e-12):
            raise ValueError("probability values must lie in [0, 1]")
        curve.y = np.clip(curve.y, 0.0, 1.0)
        return curve

    def invert(self, level: float) -> float:
        """x at which the (monotone) curve crosses ``level``.

        Linear interpolation; returns nan when the level is not bracketed.
        """
        y, x = self.y, self.x
        if y[0] > y[-1]:
            y, x = y[::-1], x[::-1]
        if not (y[0] <= level <= y[-1]):
            return math.nan
        return float(np.interp(level, y, x))


def fading_ccdf(x, shape: int = 1):
    """P(H > x) for unit-mean Nakagami power fading of integer shape m.

    Equals ``exp(-m x) * sum_{j<m} (m x)^j / j!``; shape 1 is Rayleigh.
    """
    if shape < 1 or shape != int(shape):
        raise ValueError("shape must be a positive integer")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be nonnegative")
    return gammaincc(shape, shape * x)


def fading_laplace(s, shape: int = 1):
    """Laplace transform E[exp(-s H)] of unit-mean Nakagami power fading."""
    if shape < 1 or shape != int(shape):
        raise ValueError("shape must be a positive integer")
    s = np.asarray(s, dtype=float)
    return (1.0 + s / shape) ** (-shape)


def validate(model: NetworkModel) -> list[str]:
    """Return all violated model invariants (empty when the model is ok).

    Emits :class:`ModelWarning` for legal but risky configurations:
    sparse low-altitude types where the no-satellite event is
    non-negligible.
    """
    errors: list[str] = []
    if len(model.constellations) == 0:
        errors.append("at least one constellation type is required")
    for i, c in enumerate(model.constellations, start=1):
        tag = f"constellation {i}"
        if not c.mean_orbits > 0:
            errors.append(f"{tag}: mean_orbits must be positive")
        if not c.mean_sats_per_orbit > 0:
            errors.append(f"{tag}: mean_sats_per_orbit must be positive")
        if not c.radius_km > R_EARTH_KM:
            errors.append(f"{tag}: radius <= earth radius ({R_EARTH_KM} km)")
        if not c.tx_power_w > 0:
            errors.append(f"{tag}: tx_power_w must be positive")
        if not c.gain >= 1:
            errors.append(f"{tag}: gain must be >= 1")
        if c.mean_satellites < 500 and c.altitude_km < 500:
            warnings.warn(
                f"{tag}: fewer than 500 mean satellites below 500 km altitude; "
                "the no-satellite probability is non-negligible",
                ModelWarning,
                stacklevel=2,
            )
    p = model.propagation
    if not p.path_loss_exponent > 2:
        errors.append("alpha must exceed 2 (aggregate interference diverges)")
    if not p.noise_power_w >= 0:
        errors.append("noise power must be nonnegative")
    if p.fading_shape < 1 or p.fading_shape != int(p.fading_shape):
        errors.append("fading shape must be a positive integer")
    return errors
