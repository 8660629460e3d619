"""6-DOF fixed-wing rigid-body dynamics with table aerodynamics."""

from .aircraft import (AeroTables, AircraftConfig, InertiaTensor, ThrustTable,
                       aircraft_from_dict, default_aero_tables,
                       default_thrust_table, load_aircraft)
from .atmosphere import AirData, standard_atmosphere
from .dynamics import (DT_DEFAULT, aero_force_moment, applied_forces,
                       derivatives, flow_state, integrate_step,
                       propulsion_thrust, step_closed_loop, total_energy)
from .state import RigidBodyState, quat_from_euler, quat_to_dcm, quat_to_euler
from .tables import GridTable, format_tables, load_tables, parse_tables, save_tables
from .trim import trim

__all__ = [
    "AeroTables", "AircraftConfig", "AirData", "DT_DEFAULT", "GridTable",
    "InertiaTensor", "RigidBodyState", "ThrustTable", "aero_force_moment",
    "aircraft_from_dict", "applied_forces", "default_aero_tables",
    "default_thrust_table", "derivatives", "flow_state", "format_tables",
    "integrate_step", "load_aircraft", "load_tables", "parse_tables",
    "propulsion_thrust", "quat_from_euler", "quat_to_dcm", "quat_to_euler",
    "save_tables", "standard_atmosphere", "step_closed_loop", "total_energy",
    "trim",
]
