"""Aircraft physical configuration: mass, inertia, aero and thrust tables.

The built-in coefficient set is a documented, physically plausible model of
a 9 kg tandem-wing airframe: linear lift slope with a stall clamp, a
quadratic drag polar, and conventional stability/control derivatives.  It
is NOT measured data; substitute real tables via ``tables_file`` /
``load_tables`` when available.
"""

from dataclasses import dataclass, field

import numpy as np
import yaml

from ..errors import ConfigurationError
from .tables import GridTable, load_tables

DEG = np.pi / 180.0

# Order of the scalar-derivative vector consumed by the jitted kernels.
DERIV_NAMES = (
    "cl_q", "cl_de",                        # lift: pitch rate, elevator
    "cy_p", "cy_r", "cy_da", "cy_dr",       # side force
    "clp", "clr", "cl_da", "cl_dr",         # roll moment
    "cm_q", "cm_de",                        # pitch moment
    "cn_p", "cn_r", "cn_da", "cn_dr",       # yaw moment
)

DEFAULT_DERIVS = {
    "cl_q": 4.0, "cl_de": 0.35,
    "cy_p": 0.0, "cy_r": 0.0, "cy_da": 0.0, "cy_dr": 0.15,
    "clp": -0.45, "clr": 0.08, "cl_da": 0.16, "cl_dr": 0.01,
    "cm_q": -12.0, "cm_de": -1.1,
    "cn_p": -0.03, "cn_r": -0.09, "cn_da": -0.005, "cn_dr": -0.07,
}


@dataclass(frozen=True)
class InertiaTensor:
    """Diagonal inertia tensor; the body xz-plane is a symmetry plane so all
    cross products are fixed to zero."""

    ixx: float
    iyy: float
    izz: float

    def __post_init__(self):
        if not (self.ixx > 0 and self.iyy > 0 and self.izz > 0):
            raise ConfigurationError("inertia diagonal must be strictly positive")
        if (self.ixx + self.iyy < self.izz or self.iyy + self.izz < self.ixx
                or self.izz + self.ixx < self.iyy):
            raise ConfigurationError(
                "inertia violates the rigid-body triangle inequality")


@dataclass
class AeroTables:
    """Sampled longitudinal grids over alpha, lateral grids over beta, plus
    scalar rate/surface derivatives.

    Longitudinal tables are functions of angle of attack (rad); lateral
    static tables are functions of sideslip (rad) and must be odd so the
    airframe keeps its xz-plane symmetry.
    """

    cl: GridTable      # lift coefficient vs alpha
    cd: GridTable      # drag coefficient vs alpha
    cm: GridTable      # pitch moment coefficient vs alpha
    cy: GridTable      # side force coefficient vs beta
    cl_roll: GridTable  # roll moment coefficient vs beta
    cn: GridTable      # yaw moment coefficient vs beta
    derivs: dict = field(default_factory=lambda: dict(DEFAULT_DERIVS))

    def __post_init__(self):
        for tab in (self.cl, self.cd, self.cm, self.cy, self.cl_roll, self.cn):
            if tab.ndim != 1:
                raise ConfigurationError(f"aero table {tab.name} must be 1-D")
        unknown = set(self.derivs) - set(DERIV_NAMES)
        if unknown:
            raise ConfigurationError(f"unknown aero derivatives: {sorted(unknown)}")
        merged = dict(DEFAULT_DERIVS)
        merged.update(self.derivs)
        self.derivs = merged

    @property
    def alpha_range(self):
        pts = self.cl.axes[0][1]
        return float(pts[0]), float(pts[-1])

    def deriv_vector(self) -> np.ndarray:
        return np.array([float(self.derivs[n]) for n in DERIV_NAMES])


@dataclass
class ThrustTable:
    """Thrust = throttle_curve(throttle) * max_thrust(airspeed, altitude).

    ``throttle_curve`` must be monotone non-decreasing with curve(0) = 0 so
    zero command gives zero thrust and thrust never decreases with
    throttle; ``max_thrust`` holds the full-throttle bench values.
    """

    throttle_curve: GridTable   # 1-D over throttle in [0, 1]
    max_thrust: GridTable       # 2-D over (airspeed m/s, altitude m)

    def __post_init__(self):
        if self.throttle_curve.ndim != 1 or self.max_thrust.ndim != 2:
            raise ConfigurationError("thrust tables must be 1-D curve + 2-D map")
        curve = self.throttle_curve.values
        if curve[0] != 0.0 or np.any(np.diff(curve) < 0):
            raise ConfigurationError(
                "throttle curve must start at 0 and be monotone non-decreasing")
        if np.any(self.max_thrust.values < 0):
            raise ConfigurationError("max thrust values must be non-negative")


@dataclass
class AircraftConfig:
    """Everything the dynamics needs to know about one airframe."""

    mass: float = 9.0                      # kg, takeoff weight
    inertia: InertiaTensor = field(
        default_factory=lambda: InertiaTensor(ixx=0.35, iyy=0.70, izz=1.00))
    wing_area: float = 0.335               # m^2, front 0.2 + rear 0.135
    mean_chord: float = 0.21               # m
    wingspan: float = 1.67                 # m, front wing span
    surface_limit: float = 25.0 * DEG      # rad, deflection authority
    gravity: float = 9.81                  # m/s^2, +down
    aero: AeroTables = None
    thrust: ThrustTable = None

    def __post_init__(self):
        if not (self.mass > 0 and self.wing_area > 0 and self.mean_chord > 0
                and self.wingspan > 0):
            raise ConfigurationError("mass and reference geometry must be positive")
        if self.aero is None:
            self.aero = default_aero_tables()
        if self.thrust is None:
            self.thrust = default_thrust_table()
        self._packed = None

    def packed(self) -> tuple:
        """Flat tuple of arrays/floats consumed by the numba kernels."""
        if self._packed is None:
            a = self.aero
            t = self.thrust
            self._packed = (
                a.cl.axes[0][1], a.cl.values,
                a.cd.values, a.cm.values,
                a.cy.axes[0][1], a.cy.values,
                a.cl_roll.values, a.cn.values,
                a.deriv_vector(),
                t.throttle_curve.axes[0][1], t.throttle_curve.values,
                t.max_thrust.axes[0][1], t.max_thrust.axes[1][1],
                t.max_thrust.values,
                float(self.mass),
                float(self.inertia.ixx), float(self.inertia.iyy),
                float(self.inertia.izz),
                float(self.wing_area), float(self.wingspan),
                float(self.mean_chord), float(self.gravity),
            )
            # cd/cm must share the cl alpha grid, cl_roll/cn the cy beta grid
            for tab in (a.cd, a.cm):
                if not np.array_equal(tab.axes[0][1], a.cl.axes[0][1]):
                    raise ConfigurationError(
                        "cd/cm tables must share the cl alpha breakpoints")
            for tab in (a.cl_roll, a.cn):
                if not np.array_equal(tab.axes[0][1], a.cy.axes[0][1]):
                    raise ConfigurationError(
                        "cl_roll/cn tables must share the cy beta breakpoints")
        return self._packed


# --- built-in coefficient set ---------------------------------------------

CL0 = 0.20
CL_ALPHA = 4.8          # per rad
STALL_ALPHA = 14.0      # deg
CD0 = 0.035
K_INDUCED = 0.05        # quadratic polar factor
CM0 = 0.02
CM_ALPHA = -0.8         # per rad

ALPHA_BREAKPOINTS_DEG = np.array(
    [-16, -14, -12, -10, -8, -6, -4, -2, 0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20],
    dtype=float)
BETA_BREAKPOINTS_DEG = np.array([-20, -15, -10, -5, 0, 5, 10, 15, 20], dtype=float)


def _cl_of_alpha(alpha_deg):
    """Linear lift slope clamped past stall with a gentle post-stall decay."""
    a = np.asarray(alpha_deg, dtype=float)
    cl = CL0 + CL_ALPHA * np.radians(a)
    cl_stall = CL0 + CL_ALPHA * np.radians(STALL_ALPHA)
    over = a > STALL_ALPHA
    cl = np.where(over, cl_stall - 0.07 * (a - STALL_ALPHA), cl)
    cl_neg = CL0 - CL_ALPHA * np.radians(STALL_ALPHA)
    under = a < -STALL_ALPHA
    cl = np.where(under, cl_neg + 0.07 * (-a - STALL_ALPHA), cl)
    return cl


def default_aero_tables() -> AeroTables:
    alpha = np.radians(ALPHA_BREAKPOINTS_DEG)
    cl_vals = _cl_of_alpha(ALPHA_BREAKPOINTS_DEG)
    cd_vals = CD0 + K_INDUCED * cl_vals ** 2
    cm_vals = CM0 + CM_ALPHA * alpha
    beta = np.radians(BETA_BREAKPOINTS_DEG)
    return AeroTables(
        cl=GridTable("cl_alpha", [("alpha_rad", alpha)], cl_vals),
        cd=GridTable("cd_alpha", [("alpha_rad", alpha)], cd_vals),
        cm=GridTable("cm_alpha", [("alpha_rad", alpha)], cm_vals),
        cy=GridTable("cy_beta", [("beta_rad", beta)], -0.30 * beta),
        cl_roll=GridTable("cl_beta", [("beta_rad", beta)], -0.06 * beta),
        cn=GridTable("cn_beta", [("beta_rad", beta)], 0.07 * beta),
    )


def default_thrust_table() -> ThrustTable:
    # Electric prop estimate: ~45 N static falling off with airspeed,
    # scaled by density ratio; superlinear throttle response.
    thr = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    frac = np.array([0.0, 0.15, 0.42, 0.72, 1.0])
    v = np.array([0.0, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 60])
    h = np.array([0.0, 500, 1000, 2000, 4000])
    t0, vmax = 45.0, 60.0
    sigma = np.array([(1 - 0.0065 * hh / 288.15) ** 4.2559 for hh in h])
    grid = t0 * np.outer(1.0 - 0.55 * v / vmax, sigma)
    return ThrustTable(
        throttle_curve=GridTable("throttle_curve", [("throttle", thr)], frac),
        max_thrust=GridTable("thrust_max",
                             [("airspeed_mps", v), ("altitude_m", h)], grid),
    )


def load_aircraft(path) -> AircraftConfig:
    """Load an aircraft description from YAML, with optional table file."""
    with open(path, "r") as fh:
        doc = yaml.safe_load(fh) or {}
    return aircraft_from_dict(doc, base_dir=str(path))


def aircraft_from_dict(doc: dict, base_dir: str = "") -> AircraftConfig:
    import os

    kwargs = {}
    if "mass_kg" in doc:
        kwargs["mass"] = float(doc["mass_kg"])
    if "inertia" in doc:
        i = doc["inertia"]
        kwargs["inertia"] = InertiaTensor(float(i["ixx"]), float(i["iyy"]),
                                          float(i["izz"]))
    for key, name in (("wing_area_m2", "wing_area"), ("mean_chord_m", "mean_chord"),
                      ("wingspan_m", "wingspan"), ("gravity", "gravity")):
        if key in doc:
            kwargs[name] = float(doc[key])
    if "surface_limit_deg" in doc:
        kwargs["surface_limit"] = float(doc["surface_limit_deg"]) * DEG

    derivs = dict(doc.get("derivatives", {}))
    aero = None
    thrust = None
    if "tables_file" in doc:
        tpath = doc["tables_file"]
        if base_dir and not os.path.isabs(tpath):
            tpath = os.path.join(os.path.dirname(base_dir), tpath)
        tabs = load_tables(tpath)
        try:
            aero = AeroTables(cl=tabs["cl_alpha"], cd=tabs["cd_alpha"],
                              cm=tabs["cm_alpha"], cy=tabs["cy_beta"],
                              cl_roll=tabs["cl_beta"], cn=tabs["cn_beta"],
                              derivs=derivs)
            thrust = ThrustTable(throttle_curve=tabs["throttle_curve"],
                                 max_thrust=tabs["thrust_max"])
        except KeyError as exc:
            raise ConfigurationError(f"tables file missing table {exc}") from exc
    elif derivs:
        aero = default_aero_tables()
        aero.derivs.update({k: float(v) for k, v in derivs.items()})
    if aero is not None:
        kwargs["aero"] = aero
    if thrust is not None:
        kwargs["thrust"] = thrust
    return AircraftConfig(**kwargs)
