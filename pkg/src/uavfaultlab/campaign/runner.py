"""Batch campaign execution over fault-mode x phase x seed matrices."""

import copy
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import yaml

from ..errors import ScenarioError
from ..faultlab import FaultSpec
from .scenario import Scenario
from .simloop import run_simulation

DEFAULT_PHASES = ("level_flight", "glide_slope")


@dataclass
class CampaignEntry:
    """One fault configuration to sweep over phases and seeds.

    target/mode of None produces unfaulted control runs (the false-positive
    guard of the classifier check).
    """

    target: str = None
    mode: str = None
    params: dict = field(default_factory=dict)
    phases: tuple = DEFAULT_PHASES
    seeds: tuple = (0, 1, 2, 3, 4)
    duration_s: float = None  # override base scenario duration


@dataclass
class CampaignMatrix:
    entries: list
    injection_offset_s: float = 30.0

    def __post_init__(self):
        if not self.entries:
            raise ScenarioError("campaign matrix is empty")
        for e in self.entries:
            for ph in e.phases:
                if ph not in ("climb", "level_flight", "glide_slope", "attack"):
                    raise ScenarioError(f"invalid phase {ph!r} in matrix")

    def run_count(self):
        return sum(len(e.phases) * len(e.seeds) for e in self.entries)


def true_location(target) -> str:
    if target is None:
        return "None"
    if target.startswith("gps"):
        return "GPS"
    if target.startswith("imu"):
        return "IMU"
    if target.startswith("servo"):
        return "Actuator"
    raise ScenarioError(f"unknown fault target {target!r}")


def build_runs(matrix: CampaignMatrix, base: Scenario) -> list:
    """Expand the matrix into (run_id, scenario, labels); validates every
    scenario up front so a bad entry aborts before anything executes."""
    runs = []
    for entry in matrix.entries:
        for phase in entry.phases:
            for seed in entry.seeds:
                sc = copy.deepcopy(base)
                sc.seed = int(seed)
                if entry.duration_s is not None:
                    sc.duration = float(entry.duration_s)
                if entry.target is None:
                    run_id = f"none_{phase}_s{seed}"
                    sc.fault_specs = []
                else:
                    run_id = (f"{entry.target.replace('.', '-')}"
                              f"-{entry.mode}_{phase}_s{seed}")
                    sc.fault_specs = [FaultSpec(
                        target=entry.target, mode=entry.mode,
                        params=dict(entry.params), start_phase=phase,
                        start_offset_s=matrix.injection_offset_s)]
                sc.name = run_id
                # Re-validate (fault specs changed after construction).
                sc.__post_init__()
                # Glide-slope injections need the mission to actually glide.
                if phase == "glide_slope" and sc.mission.glide_start_time is None:
                    raise ScenarioError(
                        f"{run_id}: base mission never enters the glide slope")
                labels = {"target": entry.target, "mode": entry.mode,
                          "phase": phase, "seed": int(seed),
                          "location": true_location(entry.target)}
                runs.append((run_id, sc, labels))
    ids = [r[0] for r in runs]
    if len(ids) != len(set(ids)):
        raise ScenarioError("duplicate run ids in campaign matrix")
    return runs


def _execute_one(args):
    run_id, scenario, out_dir = args
    result = run_simulation(scenario)
    run_dir = os.path.join(out_dir, "runs", run_id)
    result.write(run_dir)
    return run_id, result.termination, result.t_final


def run_campaign(matrix: CampaignMatrix, base: Scenario, out_dir,
                 parallel: int = 1, progress=None) -> dict:
    """Execute every run, write runs/<id>/{telemetry.csv,summary.json} and
    an index.json mapping run id -> ground-truth labels."""
    runs = build_runs(matrix, base)
    os.makedirs(os.path.join(out_dir, "runs"), exist_ok=True)
    jobs = [(run_id, sc, out_dir) for run_id, sc, _ in runs]
    outcomes = {}
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            for run_id, termination, t_final in pool.map(_execute_one, jobs):
                outcomes[run_id] = (termination, t_final)
                if progress:
                    progress(run_id, termination, t_final)
    else:
        for job in jobs:
            run_id, termination, t_final = _execute_one(job)
            outcomes[run_id] = (termination, t_final)
            if progress:
                progress(run_id, termination, t_final)

    index = {
        "out_dir": str(out_dir),
        "injection_offset_s": matrix.injection_offset_s,
        "runs": {
            run_id: {
                **labels,
                "termination": outcomes[run_id][0],
                "t_final": outcomes[run_id][1],
                "telemetry": os.path.join("runs", run_id, "telemetry.csv"),
                "summary": os.path.join("runs", run_id, "summary.json"),
            }
            for run_id, _, labels in runs
        },
    }
    with open(os.path.join(out_dir, "index.json"), "w") as fh:
        json.dump(index, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return index


def default_matrix(seeds: int = 5) -> CampaignMatrix:
    """The full injection catalog: 4 GPS + 4 IMU + 5 steering-gear modes
    over both injection phases, plus unfaulted control runs."""
    seed_tuple = tuple(range(seeds))
    entries = [
        CampaignEntry("gps", "deception", seeds=seed_tuple),
        CampaignEntry("gps", "weak_signal", seeds=seed_tuple),
        CampaignEntry("gps", "weaker_signal", seeds=seed_tuple),
        CampaignEntry("gps", "interruption", seeds=seed_tuple),
        CampaignEntry("imu", "multiplicative", seeds=seed_tuple),
        CampaignEntry("imu", "constant_deviation", seeds=seed_tuple),
        CampaignEntry("imu", "drift", seeds=seed_tuple),
        CampaignEntry("imu", "disconnect", seeds=seed_tuple),
        CampaignEntry("servo.all", "constant_deviation", seeds=seed_tuple),
        CampaignEntry("servo.all", "stuck", seeds=seed_tuple),
        CampaignEntry("servo.all", "loose", seeds=seed_tuple),
        CampaignEntry("servo.all", "damage", seeds=seed_tuple),
        CampaignEntry("servo.all", "jitter", seeds=seed_tuple),
        CampaignEntry(None, None, seeds=seed_tuple),
    ]
    return CampaignMatrix(entries=entries)


def load_matrix(path) -> CampaignMatrix:
    with open(path, "r") as fh:
        doc = yaml.safe_load(fh) or {}
    if not isinstance(doc, dict) or "runs" not in doc:
        raise ScenarioError(f"{path}: matrix file needs a 'runs' list")
    default_phases = tuple(doc.get("phases", DEFAULT_PHASES))
    default_seeds = doc.get("seeds", 5)
    entries = []
    for i, r in enumerate(doc["runs"]):
        r = dict(r or {})
        seeds = r.pop("seeds", default_seeds)
        seeds = tuple(range(int(seeds))) if isinstance(seeds, int) else tuple(seeds)
        entry = CampaignEntry(
            target=r.pop("target", None), mode=r.pop("mode", None),
            params=r.pop("params", {}) or {},
            phases=tuple(r.pop("phases", default_phases)),
            seeds=seeds, duration_s=r.pop("duration_s", None))
        if r:
            raise ScenarioError(f"matrix run #{i}: unknown fields {sorted(r)}")
        if (entry.target is None) != (entry.mode is None):
            raise ScenarioError(f"matrix run #{i}: target and mode go together")
        entries.append(entry)
    return CampaignMatrix(entries=entries,
                          injection_offset_s=float(doc.get("injection_offset_s", 30.0)))
