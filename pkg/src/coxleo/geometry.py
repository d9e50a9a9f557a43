"""Geometry of circular orbits around a spherical Earth.

Conventions used throughout the package:

* Distances are in kilometers, angles in radians.
* The reference user sits at the north pole ``(0, 0, R_EARTH_KM)``.  By
  rotational symmetry of the orbit models this is the typical user.
* An orbit is a great circle of radius ``r > R_EARTH_KM`` described by a
  longitude angle (ascending node) and an inclination against the
  equatorial plane.  A satellite position on the orbit is given by its
  anomaly, the angle along the circle.
* The "tilt" of an orbit is ``pi/2 - inclination``: the angular distance
  from the user's zenith axis to the orbit's point of closest approach.
  Band integrals over orbit orientation are parameterized by tilt.

All functions broadcast over numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

R_EARTH_KM = 6400.0


def _require_above_earth(radius_km) -> None:
    if np.any(np.asarray(radius_km) <= R_EARTH_KM):
        raise ValueError(f"orbital radius must exceed {R_EARTH_KM} km")


def user_satellite_distance(radius_km, inclination, anomaly):
    """Chord distance from the pole user to a satellite on an orbit.

    The anomaly is measured from the ascending node, so the closest
    approach to the user is at ``anomaly = pi/2``.
    """
    _require_above_earth(radius_km)
    r = np.asarray(radius_km, dtype=float)
    s = np.sin(anomaly) * np.sin(inclination)
    return np.sqrt(r * r - 2.0 * r * R_EARTH_KM * s + R_EARTH_KM**2)


def chord_distance(radius_km, tilt, anomaly):
    """Chord distance with the anomaly measured from the closest approach.

    Increasing on ``anomaly in [0, pi]``; equals
    ``user_satellite_distance(r, pi/2 - tilt, pi/2 + anomaly)``.
    """
    _require_above_earth(radius_km)
    r = np.asarray(radius_km, dtype=float)
    c = np.cos(anomaly) * np.cos(tilt)
    return np.sqrt(r * r - 2.0 * r * R_EARTH_KM * c + R_EARTH_KM**2)


def orbital_to_cartesian(radius_km, longitude, inclination, anomaly):
    """Cartesian position of a satellite, shape ``broadcast + (3,)``."""
    r, th, ph, om = np.broadcast_arrays(
        np.asarray(radius_km, dtype=float), longitude, inclination, anomaly
    )
    cos_om, sin_om = np.cos(om), np.sin(om)
    cos_ph, sin_ph = np.cos(ph), np.sin(ph)
    x = r * (np.cos(th) * cos_om - np.sin(th) * sin_om * cos_ph)
    y = r * (np.sin(th) * cos_om + np.cos(th) * sin_om * cos_ph)
    z = r * sin_om * sin_ph
    return np.stack([x, y, z], axis=-1)


@dataclass(frozen=True)
class OrbitGeom:
    """A single circular orbit: radius, ascending-node longitude, inclination.

    Longitude and inclination both live in [0, pi); together with an
    anomaly in [0, 2*pi) they reach every satellite position exactly once.
    """

    radius_km: float
    longitude: float
    inclination: float

    def __post_init__(self):
        _require_above_earth(self.radius_km)
        if not 0 <= self.longitude < np.pi:
            raise ValueError("longitude must lie in [0, pi)")
        if not 0 <= self.inclination < np.pi:
            raise ValueError("inclination must lie in [0, pi)")

    def position(self, anomaly):
        return orbital_to_cartesian(self.radius_km, self.longitude, self.inclination, anomaly)

    def user_distance(self, anomaly):
        return user_satellite_distance(self.radius_km, self.inclination, anomaly)


class VisibilityLimits(NamedTuple):
    max_distance_km: float
    max_tilt: float


def visibility_limits(radius_km) -> VisibilityLimits:
    """Horizon limits for orbits of the given radius.

    ``max_distance_km`` is the chord distance at zero elevation; a
    satellite is visible iff its distance is at most this.  ``max_tilt``
    is the largest orbit tilt at which any part of the orbit is visible;
    it equals the Earth-central angle of the visibility cap.
    """
    _require_above_earth(radius_km)
    r = np.asarray(radius_km, dtype=float)
    d_max = np.sqrt(r * r - R_EARTH_KM**2)
    return VisibilityLimits(d_max, np.arccos(R_EARTH_KM / r))


def cos_earth_angle(radius_km, distance_km):
    """Cosine of the Earth-central angle between the user and any point
    at orbital radius ``r`` whose chord distance from the user is ``d``."""
    _require_above_earth(radius_km)
    r = np.asarray(radius_km, dtype=float)
    d = np.asarray(distance_km, dtype=float)
    slack = 1e-9 * r
    if np.any(d < r - R_EARTH_KM - slack) or np.any(d > r + R_EARTH_KM + slack):
        raise ValueError("distance outside the reachable range [r - r_e, r + r_e]")
    return (r * r + R_EARTH_KM**2 - d * d) / (2.0 * r * R_EARTH_KM)


def arc_fraction_argument(cos_cap, cos_tilt):
    """Stable evaluation of ``1 - (cos_cap / cos_tilt)**2``, clipped to 0.

    Written as a product so that no precision is lost when the cap
    boundary grazes the orbit (``cos_cap -> cos_tilt``).
    """
    cos_cap = np.asarray(cos_cap, dtype=float)
    cos_tilt = np.asarray(cos_tilt, dtype=float)
    num = (cos_tilt - cos_cap) * (cos_tilt + cos_cap)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / (cos_tilt * cos_tilt)
    return np.clip(out, 0.0, 1.0)


def cap_orbit_arc_angle(radius_km, inclination, distance_km):
    """Half-angle (in anomaly) of the orbit arc within chord distance
    ``distance_km`` of the user.

    The arc {anomaly: distance <= d} has angular measure twice this
    value; its length is ``2 * r * cap_orbit_arc_angle(...)``.  Returns 0
    when the orbit stays outside the cap and pi when it lies entirely
    inside.
    """
    _require_above_earth(radius_km)
    cos_cap = cos_earth_angle(radius_km, distance_km)
    cos_tilt = np.sin(np.asarray(inclination, dtype=float))
    half = np.arcsin(np.sqrt(arc_fraction_argument(cos_cap, cos_tilt)))
    return np.where(cos_cap >= 0.0, half, np.pi - half)


def omega_window(radius_km, tilt, distance_km):
    """Anomaly window ``(w1, w2)`` of visible orbit points farther than
    ``distance_km``, with the anomaly measured from the closest approach.

    On an orbit of the given tilt, ``chord_distance`` grows from the
    closest approach; it crosses ``distance_km`` at ``w1`` (0 if the
    whole orbit is farther) and the visibility horizon at ``w2``.
    Satisfies ``0 <= w1 <= w2 <= pi/2``.
    """
    _require_above_earth(radius_km)
    r = np.asarray(radius_km, dtype=float)
    cos_tilt = np.cos(tilt)
    cos_cap = cos_earth_angle(r, distance_km)
    w1 = np.arcsin(np.sqrt(arc_fraction_argument(cos_cap, cos_tilt)))
    w2 = np.arcsin(np.sqrt(arc_fraction_argument(R_EARTH_KM / r, cos_tilt)))
    return np.minimum(w1, w2), w2
