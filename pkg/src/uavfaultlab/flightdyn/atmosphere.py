"""International Standard Atmosphere, troposphere segment only."""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError

# ISA sea-level constants
T0 = 288.15        # K
P0 = 101325.0      # Pa
RHO0 = 1.225       # kg/m^3
LAPSE = 0.0065     # K/m
R_AIR = 287.05287  # J/(kg K)
GAMMA = 1.4
G0 = 9.80665       # m/s^2 (ISA reference gravity, distinct from sim gravity)

ALT_MIN = -500.0
ALT_MAX = 11000.0

_EXP = G0 / (LAPSE * R_AIR)  # pressure exponent, ~5.2559


@dataclass(frozen=True)
class AirData:
    """Local air properties plus wind-relative flow quantities."""

    density: float          # kg/m^3
    speed_of_sound: float   # m/s
    temperature: float      # K
    pressure: float         # Pa

    def __post_init__(self):
        if not (self.density > 0.0 and self.speed_of_sound > 0.0):
            raise ConfigurationError(
                f"non-physical air data: rho={self.density}, a={self.speed_of_sound}")


def standard_atmosphere(altitude_m: float) -> AirData:
    """ISA troposphere properties at a geometric altitude.

    Valid for altitude in [-500, 11000] m; anything else raises
    ConfigurationError.
    """
    if not np.isfinite(altitude_m) or not (ALT_MIN <= altitude_m <= ALT_MAX):
        raise ConfigurationError(
            f"altitude {altitude_m} m outside ISA troposphere range "
            f"[{ALT_MIN}, {ALT_MAX}] m")
    temp = T0 - LAPSE * altitude_m
    pressure = P0 * (temp / T0) ** _EXP
    density = pressure / (R_AIR * temp)
    sound = float(np.sqrt(GAMMA * R_AIR * temp))
    return AirData(density=density, speed_of_sound=sound,
                   temperature=temp, pressure=pressure)
