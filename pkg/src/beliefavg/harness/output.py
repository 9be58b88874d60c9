"""CSV emission for traces and run summaries."""
from __future__ import annotations

from pathlib import Path

TRACE_COLUMNS = ("t", "e_t", "seminorm", "mass_y", "mass_z", "floor_min", "floor_max", "verdict")
SUMMARY_COLUMNS = ("rep", "seed", "e_T", "seminorm_T", "slope", "verdict_T", "classified_at",
                   "settled_at", "steady_error", "time_to_threshold", "v_min")


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def write_trace_csv(path, trace, verdicts=None) -> None:
    lines = [",".join(TRACE_COLUMNS)]
    for k in range(len(trace)):
        verdict = verdicts[k] if verdicts is not None else "none"
        lines.append(",".join((
            str(int(trace.t[k])), fmt(float(trace.e_t[k])), fmt(float(trace.seminorm[k])),
            fmt(float(trace.mass_y[k])), fmt(float(trace.mass_z[k])),
            str(int(trace.floor_min[k])), str(int(trace.floor_max[k])), verdict,
        )))
    Path(path).write_text("\n".join(lines) + "\n")


def read_trace_csv(path) -> list[dict]:
    rows = Path(path).read_text().splitlines()
    header = rows[0].split(",")
    if tuple(header) != TRACE_COLUMNS:
        raise ValueError(f"unexpected trace header {header}")
    return [dict(zip(header, r.split(","))) for r in rows[1:]]


def write_summary(path, summary) -> None:
    lines = [",".join(SUMMARY_COLUMNS)]
    for r in summary.reps:
        lines.append(",".join(fmt(getattr(r, c)) for c in SUMMARY_COLUMNS))
    lines.append("")
    lines.append("statistic,value")
    for k, v in summary.aggregate().items():
        lines.append(f"{k},{fmt(v)}")
    Path(path).write_text("\n".join(lines) + "\n")
