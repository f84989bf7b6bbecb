"""Result serialization: long-format delimiter-separated text.

Comment lines (#) carry the full config echo - including every default that
filled a gap, marked [default] - plus headline metrics.  Data rows follow a
header row.  Formatting is fixed at 12 significant digits and row order is
deterministic (time-major for trajectories, axis1-major for sweeps), so
identical results serialize to identical bytes.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .config import ParsedConfig, config_items
from .scenario import SimResult
from .surveillance import DetectionResult
from .sweep import SweepResult


def _num(x: float) -> str:
    return format(float(x), ".12g")


def _opt(x: Optional[float]) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return _num(x)


def _config_comments(config: Optional[ParsedConfig]) -> List[str]:
    if config is None:
        return []
    out = []
    for key, value, provided in config_items(config):
        mark = "" if provided else " [default]"
        out.append(f"# {key} = {value}{mark}")
    return out


def render_trajectory(result: SimResult,
                      config: Optional[ParsedConfig] = None) -> str:
    """SimResult -> text document; compartment values as fractions of N."""
    lines = ["# epitrigger trajectory"]
    lines += _config_comments(config)
    lines.append(f"# final_size = {_num(result.final_size)}")
    lines.append(f"# peak_prevalence = {_num(result.peak_prevalence)}")
    lines.append(f"# peak_time = {_num(result.peak_time)}")
    lines.append(f"# detection_time = {_opt(result.detection_time) or 'none'}")
    lines.append(f"# trigger_prevalence = {_opt(result.trigger_prevalence) or 'none'}")
    lines.append(f"# truncated = {str(result.truncated).lower()}")
    lines.append("time,compartment,value")
    for traj in (result.phase1, result.phase2):
        if traj is None:
            continue
        for t, state in zip(traj.times, traj.states):
            for label, count in zip(traj.labels, state):
                lines.append(f"{_num(t)},{label},{_num(count / traj.n)}")
    return "\n".join(lines) + "\n"


def render_sweep(result: SweepResult,
                 config: Optional[ParsedConfig] = None) -> str:
    """SweepResult -> text document, one row per grid cell, axis1-major."""
    lines = ["# epitrigger sweep"]
    lines += _config_comments(config)
    for err in result.errors:
        where = ",".join(str(i) for i in err.index)
        lines.append(f"# cell ({where}) failed: {err.message}")
    lines.append("axis1_value,axis2_value,final_size,detection_time,"
                 "peak_prevalence,truncated")
    vals1 = result.axes[0].values()
    if len(result.axes) == 1:
        for i, v1 in enumerate(vals1):
            lines.append(",".join([
                _num(v1), "",
                _opt(result.values[i]),
                _opt(result.detection_times[i]),
                _opt(result.peak_prevalence[i]),
                str(bool(result.truncated[i])).lower(),
            ]))
    else:
        vals2 = result.axes[1].values()
        for i, v1 in enumerate(vals1):
            for j, v2 in enumerate(vals2):
                lines.append(",".join([
                    _num(v1), _num(v2),
                    _opt(result.values[i, j]),
                    _opt(result.detection_times[i, j]),
                    _opt(result.peak_prevalence[i, j]),
                    str(bool(result.truncated[i, j])).lower(),
                ]))
    return "\n".join(lines) + "\n"


def render_detection(days: np.ndarray, prevalence: np.ndarray,
                     detection: DetectionResult,
                     config: Optional[ParsedConfig] = None) -> str:
    """Day-by-day detection table for a naive-phase run."""
    lines = ["# epitrigger detection"]
    lines += _config_comments(config)
    if detection.detection_day is None:
        lines.append("# detection_day = none")
        lines.append("# induced_pstar = none")
    else:
        lines.append(f"# detection_day = {detection.detection_day}")
        lines.append(f"# induced_pstar = {_num(detection.prevalence_at_detection)}")
    lines.append("day,prevalence,cumulative_probability")
    for day, prev, cum in zip(days, prevalence, detection.cumulative_probability):
        lines.append(f"{int(day)},{_num(prev)},{_num(cum)}")
    return "\n".join(lines) + "\n"


def emit_result(result, destination, config: Optional[ParsedConfig] = None) -> str:
    """Serialize a SimResult or SweepResult to a path or file-like object.

    Returns the rendered text.  Identical results produce identical bytes.
    """
    if isinstance(result, SimResult):
        text = render_trajectory(result, config)
    elif isinstance(result, SweepResult):
        text = render_sweep(result, config)
    else:
        raise TypeError(f"cannot serialize {type(result).__name__}")
    _write_text(destination, text)
    return text


def _write_text(destination, text: str):
    if hasattr(destination, "write"):
        destination.write(text)
        return
    with open(Path(destination), "w", newline="\n") as fh:
        fh.write(text)


def read_table(source) -> Tuple[List[str], List[str], List[List[str]]]:
    """Read back a result document: (comment lines, header fields, rows)."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text()
    comments = []
    header: List[str] = []
    rows: List[List[str]] = []
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            comments.append(line)
        elif not header:
            header = line.split(",")
        else:
            rows.append(line.split(","))
    return comments, header, rows
