"""Randomized two-lane overtaking scenarios and their file format.

A scenario places a slow leader (NPC1) ahead of the ego in its lane and,
depending on the NPC count, one or two oncoming vehicles on the opposite
lane. Every scenario draws from its own seed-derived stream, so a batch
is reproducible regardless of generation or execution order. Files are
one JSON object per line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ParameterRanges",
    "ScenarioSpec",
    "generate_scenarios",
    "save_scenarios",
    "load_scenarios",
    "scenario_rng",
]


@dataclass(frozen=True)
class ParameterRanges:
    d1_min: float = 20.0
    d1_max: float = 60.0
    d2_min: float = 30.0
    d2_max: float = 120.0
    d3_min: float = 20.0
    d3_max: float = 80.0
    v1_min: float = 1.0
    v1_max: float = 3.0
    v2_min: float = 1.0
    v2_max: float = 3.0
    v3_min: float = 1.0
    v3_max: float = 3.0
    npc_counts: tuple[int, ...] = (1, 2, 3)

    def __post_init__(self):
        pairs = [
            ("d1", self.d1_min, self.d1_max),
            ("d2", self.d2_min, self.d2_max),
            ("d3", self.d3_min, self.d3_max),
            ("v1", self.v1_min, self.v1_max),
            ("v2", self.v2_min, self.v2_max),
            ("v3", self.v3_min, self.v3_max),
        ]
        for name, lo, hi in pairs:
            if not (0 <= lo <= hi):
                raise ValueError(f"range {name}: need 0 <= min <= max, got [{lo}, {hi}]")
        if not self.npc_counts or any(c not in (1, 2, 3) for c in self.npc_counts):
            raise ValueError("npc_counts must be a non-empty subset of {1, 2, 3}")


@dataclass(frozen=True)
class ScenarioSpec:
    scenario_id: int
    d1: float
    d2: float
    v1: float
    v2: float
    npc_count: int
    seed: int
    d3: float | None = None
    v3: float | None = None

    def __post_init__(self):
        if self.npc_count not in (0, 1, 2, 3):
            raise ValueError("npc_count must be in {0, 1, 2, 3}")
        if self.d1 <= 0 or self.d2 <= 0:
            raise ValueError("initial gaps must be positive")
        if self.v1 < 0 or self.v2 < 0:
            raise ValueError("speeds must be non-negative")
        if self.npc_count == 3 and (self.d3 is None or self.v3 is None):
            raise ValueError("npc_count 3 requires d3 and v3")


def scenario_rng(master_seed: int, scenario_id: int) -> np.random.Generator:
    """Independent stream for one scenario: stream-splitting rule of the batch."""
    return np.random.default_rng(np.random.SeedSequence((master_seed, scenario_id)))


def generate_scenarios(n: int, ranges: ParameterRanges, seed: int) -> list[ScenarioSpec]:
    """n scenario specs with fields uniform over their ranges, ids 0..n-1.

    Every field is drawn even when unused by the NPC count so each
    scenario consumes a fixed-length slice of its private stream.
    """
    specs = []
    for i in range(n):
        rng = scenario_rng(seed, i)
        npc_count = int(ranges.npc_counts[rng.integers(0, len(ranges.npc_counts))])
        d1 = float(rng.uniform(ranges.d1_min, ranges.d1_max))
        d2 = float(rng.uniform(ranges.d2_min, ranges.d2_max))
        v1 = float(rng.uniform(ranges.v1_min, ranges.v1_max))
        v2 = float(rng.uniform(ranges.v2_min, ranges.v2_max))
        d3 = float(rng.uniform(ranges.d3_min, ranges.d3_max))
        v3 = float(rng.uniform(ranges.v3_min, ranges.v3_max))
        episode_seed = int(rng.integers(0, 2**63))
        specs.append(
            ScenarioSpec(
                scenario_id=i,
                d1=d1,
                d2=d2,
                v1=v1,
                v2=v2,
                npc_count=npc_count,
                seed=episode_seed,
                d3=d3 if npc_count == 3 else None,
                v3=v3 if npc_count == 3 else None,
            )
        )
    return specs


def _spec_to_record(spec: ScenarioSpec) -> dict:
    record = {
        "id": spec.scenario_id,
        "d1_m": spec.d1,
        "d2_m": spec.d2,
        "v1_mps": spec.v1,
        "v2_mps": spec.v2,
        "npc_count": spec.npc_count,
        "seed": spec.seed,
    }
    if spec.npc_count == 3:
        record["d3_m"] = spec.d3
        record["v3_mps"] = spec.v3
    return record


def _record_to_spec(record: dict) -> ScenarioSpec:
    return ScenarioSpec(
        scenario_id=int(record["id"]),
        d1=float(record["d1_m"]),
        d2=float(record["d2_m"]),
        v1=float(record["v1_mps"]),
        v2=float(record["v2_mps"]),
        npc_count=int(record["npc_count"]),
        seed=int(record["seed"]),
        d3=float(record["d3_m"]) if "d3_m" in record else None,
        v3=float(record["v3_mps"]) if "v3_mps" in record else None,
    )


def save_scenarios(specs: list[ScenarioSpec], path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for spec in specs:
            fh.write(json.dumps(_spec_to_record(spec)) + "\n")


def load_scenarios(path) -> list[ScenarioSpec]:
    specs = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if line:
                specs.append(_record_to_spec(json.loads(line)))
    return specs
