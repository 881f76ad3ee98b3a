"""Per-iteration trace records shared by the fitters and the CLI.

Serialized one record per line as ``key=value`` pairs so traces are
greppable and plot-ready without a parser dependency.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    phase: str
    objective: float
    changed: int
    seconds: float
    work: int | None = None

    def to_line(self) -> str:
        parts = [
            f"iter={self.iteration}",
            f"phase={self.phase}",
            f"objective={self.objective!r}",
            f"changed={self.changed}",
            f"seconds={self.seconds:.6f}",
        ]
        if self.work is not None:
            parts.append(f"work={self.work}")
        return " ".join(parts)


def parse_trace_line(line: str) -> TraceRecord:
    fields = dict(part.split("=", 1) for part in line.split())
    return TraceRecord(
        iteration=int(fields["iter"]),
        phase=fields["phase"],
        objective=float(fields["objective"]),
        changed=int(fields["changed"]),
        seconds=float(fields["seconds"]),
        work=int(fields["work"]) if "work" in fields else None,
    )


def write_trace(path, records) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for rec in records:
            fh.write(rec.to_line() + "\n")


def read_trace(path) -> list[TraceRecord]:
    with open(path, "r", encoding="ascii") as fh:
        return [parse_trace_line(line) for line in fh if line.strip()]
