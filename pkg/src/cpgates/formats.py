"""On-disk formats: sequence files, grid CSV, contour files, SVG and reports.

Every writer goes through :func:`atomic_write`, so a failed run never leaves a
half-written output behind.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .landscape import ContourSet, LandscapeGrid, Polyline
from .su2 import CompositeSequence, Pulse

SCHEMA_VERSION = 1


class FormatError(ValueError):
    """Malformed input file."""


def atomic_write(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# sequence files
# ---------------------------------------------------------------------------

def sequence_to_dict(s: CompositeSequence, provenance: str = "", claimed_orders=()) -> dict:
    # phase_over_pi is the table convention; phase_rad keeps the round trip exact
    return {
        "schema_version": SCHEMA_VERSION,
        "name": s.name,
        "target": s.target,
        "pulses": [
            {"omega": p.omega, "tau": p.tau, "phase_over_pi": p.phase / math.pi, "phase_rad": p.phase}
            for p in s.pulses
        ],
        "provenance": provenance,
        "claimed_orders": [list(o) for o in claimed_orders],
    }


def sequence_from_dict(d: dict) -> tuple[CompositeSequence, dict]:
    """Parse a sequence dict; returns the sequence and its metadata."""
    try:
        version = d.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise FormatError(f"unsupported schema_version {version}")
        pulses = []
        for k, p in enumerate(d["pulses"]):
            phase = p["phase_rad"] if "phase_rad" in p else p["phase_over_pi"] * math.pi
            pulses.append(Pulse(float(p.get("omega", 1.0)), float(p.get("tau", 1.0)), float(phase)))
        seq = CompositeSequence.from_phases(
            str(d.get("name", "sequence")),
            [p.phase for p in pulses],
            [p.omega for p in pulses],
            [p.tau for p in pulses],
            str(d.get("target", "X")).upper(),
        )
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed sequence data: {exc}") from exc
    meta = {
        "provenance": d.get("provenance", ""),
        "claimed_orders": [tuple(o) for o in d.get("claimed_orders", [])],
    }
    return seq, meta


def write_sequence(path, s: CompositeSequence, provenance: str = "", claimed_orders=()):
    atomic_write(path, json.dumps(sequence_to_dict(s, provenance, claimed_orders), indent=2) + "\n")


def read_sequence(path) -> tuple[CompositeSequence, dict]:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise FormatError(f"{path}: expected a JSON object")
    return sequence_from_dict(data)


# ---------------------------------------------------------------------------
# grids and contours
# ---------------------------------------------------------------------------

def grid_to_csv(g: LandscapeGrid) -> str:
    lines = ["epsilon,delta,infidelity"]
    for i, e in enumerate(g.eps):
        for j, d in enumerate(g.delta):
            lines.append(f"{e:.12e},{d:.12e},{g.values[i, j]:.12e}")
    return "\n".join(lines) + "\n"


def write_grid(path, g: LandscapeGrid):
    atomic_write(path, grid_to_csv(g))


def read_grid(path) -> LandscapeGrid:
    text = Path(path).read_text().strip().splitlines()
    if not text or text[0].strip() != "epsilon,delta,infidelity":
        raise FormatError(f"{path}: missing grid header")
    try:
        rows = np.array([[float(v) for v in line.split(",")] for line in text[1:]])
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    eps = np.unique(rows[:, 0])
    delta = np.unique(rows[:, 1])
    if rows.shape[0] != eps.size * delta.size:
        raise FormatError(f"{path}: rows do not form a full grid")
    return LandscapeGrid(eps, delta, rows[:, 2].reshape(eps.size, delta.size))


def contours_to_dict(c: ContourSet) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "levels": list(c.levels),
        "contours": [
            {
                "level": level,
                "polylines": [{"closed": bool(p.closed), "vertices": p.points.tolist()} for p in c.polylines(level)],
            }
            for level in c.levels
        ],
    }


def write_contours(path, c: ContourSet):
    atomic_write(path, json.dumps(contours_to_dict(c)) + "\n")


def read_contours(path) -> ContourSet:
    data = json.loads(Path(path).read_text())
    out = ContourSet([float(v) for v in data["levels"]])
    for entry in data["contours"]:
        out.lines[float(entry["level"])] = [
            Polyline(np.array(p["vertices"], dtype=float).reshape(-1, 2), bool(p["closed"])) for p in entry["polylines"]
        ]
    return out


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

_LEVEL_COLOURS = ["#08306b", "#2171b5", "#6baed6", "#c6dbef"]


def contours_to_svg(c: ContourSet, box, title: str = "", size: int = 480) -> str:
    """Minimal static plot: delta on the horizontal axis, eps on the vertical.

    One stroke colour per level, darkest for the innermost (lowest) level.
    """
    (e_lo, e_hi), (d_lo, d_hi) = box
    pad = 48
    w = h = size

    def to_px(eps, delta):
        x = pad + (delta - d_lo) / (d_hi - d_lo) * (w - 2 * pad)
        y = h - pad - (eps - e_lo) / (e_hi - e_lo) * (h - 2 * pad)
        return x, y

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
           f'<rect x="{pad}" y="{pad}" width="{w - 2 * pad}" height="{h - 2 * pad}" fill="white" stroke="black"/>']
    for k, level in enumerate(sorted(c.levels)):
        colour = _LEVEL_COLOURS[min(k, len(_LEVEL_COLOURS) - 1)]
        for line in c.polylines(level):
            pts = " ".join("{:.2f},{:.2f}".format(*to_px(e, d)) for e, d in line.points)
            tag = "polygon" if line.closed else "polyline"
            out.append(f'<{tag} points="{pts}" fill="none" stroke="{colour}" stroke-width="1.2"/>')
    out.append(f'<text x="{w / 2}" y="{h - 12}" text-anchor="middle" font-size="13">detuning error delta</text>')
    out.append(f'<text x="14" y="{h / 2}" text-anchor="middle" font-size="13" '
               f'transform="rotate(-90 14 {h / 2})">Rabi error epsilon</text>')
    for val, anchor in ((d_lo, "start"), (d_hi, "end")):
        x, _ = to_px(e_lo, val)
        out.append(f'<text x="{x:.1f}" y="{h - pad + 16}" text-anchor="{anchor}" font-size="11">{val:g}</text>')
    for val in (e_lo, e_hi):
        _, y = to_px(val, d_lo)
        out.append(f'<text x="{pad - 4}" y="{y:.1f}" text-anchor="end" font-size="11">{val:g}</text>')
    if title:
        out.append(f'<text x="{w / 2}" y="{pad - 16}" text-anchor="middle" font-size="14">{title}</text>')
    legend = ", ".join(f"{lv:g}" for lv in sorted(c.levels))
    out.append(f'<text x="{w - pad}" y="{pad - 4}" text-anchor="end" font-size="10">levels: {legend}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, c: ContourSet, box, title: str = ""):
    atomic_write(path, contours_to_svg(c, box, title))


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def write_json(path, data: dict):
    atomic_write(path, json.dumps(_jsonable(data), indent=2) + "\n")


def optimization_report(result) -> dict:
    from .optimizer import spec_dict

    return {
        "schema_version": SCHEMA_VERSION,
        "objective": result.objective,
        "best_start": result.best_start,
        "params": result.params,
        "phases_over_pi": np.asarray(result.phases) / math.pi,
        "amplitudes": result.amplitudes,
        "spec": spec_dict(result.spec),
        "metadata": result.metadata,
        "starts": [
            {"index": i, "objective": float(v), "iterations": int(n)}
            for i, (v, n) in enumerate(zip(result.start_objectives, result.iterations))
        ],
    }


def profile_to_csv(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(f"{v:.12e}" for v in row) for row in rows)
    return "\n".join(lines) + "\n"
