"""EpisodeArtifact: a full serialized trajectory, one file per test case.

On disk an artifact is line-delimited JSON: a header record carrying the
schema version and case id, followed by one record per step and a final
outcome record.  Round trips are lossless.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

SCHEMA_VERSION = 1


@dataclass
class StepRecord:
    step: int
    sim_time: float
    observations: dict  # agent -> {obs name: {values: [...], unit: str}}
    actions: dict  # agent -> {glue name: [...]}
    rewards: dict  # agent -> {component: float}
    reward_totals: dict  # agent -> float
    done_codes: dict  # agent -> str | None
    platform_states: dict  # platform -> {attr: float}


@dataclass
class EpisodeArtifact:
    case_id: str
    seed: int
    parameters: dict  # epp name -> {value: float, unit: str}
    steps: list[StepRecord] = field(default_factory=list)
    final_outcome: dict = field(default_factory=dict)  # agent -> status code
    truncated: bool = False
    error: str | None = None

    def to_lines(self) -> list[str]:
        header = {
            "record": "header",
            "schema_version": SCHEMA_VERSION,
            "case_id": self.case_id,
            "seed": self.seed,
            "parameters": self.parameters,
        }
        lines = [json.dumps(header, sort_keys=True)]
        for step in self.steps:
            lines.append(json.dumps({"record": "step", **asdict(step)}, sort_keys=True))
        lines.append(
            json.dumps(
                {
                    "record": "outcome",
                    "final_outcome": self.final_outcome,
                    "truncated": self.truncated,
                    "error": self.error,
                },
                sort_keys=True,
            )
        )
        return lines

    @classmethod
    def from_lines(cls, lines: list[str]) -> "EpisodeArtifact":
        records = [json.loads(line) for line in lines if line.strip()]
        header = records[0]
        if header.get("record") != "header":
            raise ValueError("artifact does not start with a header record")
        artifact = cls(
            case_id=header["case_id"],
            seed=header["seed"],
            parameters=header["parameters"],
        )
        for record in records[1:]:
            kind = record.pop("record")
            if kind == "step":
                artifact.steps.append(StepRecord(**record))
            elif kind == "outcome":
                artifact.final_outcome = record["final_outcome"]
                artifact.truncated = record["truncated"]
                artifact.error = record.get("error")
            else:
                raise ValueError(f"unknown artifact record type '{kind}'")
        return artifact

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text("\n".join(self.to_lines()) + "\n")
        return path

    @classmethod
    def load(cls, path: str | Path) -> "EpisodeArtifact":
        return cls.from_lines(Path(path).read_text().splitlines())


def load_artifacts(directory: str | Path) -> list[EpisodeArtifact]:
    """All artifacts in a directory, ordered by file name."""
    return [
        EpisodeArtifact.load(p)
        for p in sorted(Path(directory).glob("artifact_*.jsonl"))
    ]
