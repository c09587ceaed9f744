"""CSV / JSON writers and readers for distributions, note events and reports.

Reals are written with ``repr`` so every file re-parses to the same floats.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .music import DEGREES, NotePair

P_HHL_HEADER = ("pair_index", "n1_midi", "n2_midi", "probability")
JOINT_HEADER = ("pair_index", "c1_degree", "c2_degree", "probability")
EVENT_HEADER = ("block", "position", "midi", "chord_degree", "junction_valid")


def _open_w(path):
    path = Path(path)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from None


def _rows(path, header):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            r = csv.reader(fh)
            got = tuple(next(r, ()))
            if got != header:
                raise ConfigError(f"{path}: expected header {header}, got {got}")
            return [row for row in r if row]
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None


def write_p_hhl(path, p, pairs: Sequence[NotePair]) -> None:
    with _open_w(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(P_HHL_HEADER)
        for pair, prob in zip(pairs, p):
            w.writerow((pair.index, pair.n1.midi, pair.n2.midi, repr(float(prob))))


def read_p_hhl(path) -> tuple[np.ndarray, list[tuple[int, int, int]]]:
    rows = _rows(path, P_HHL_HEADER)
    keys = [(int(a), int(b), int(c)) for a, b, c, _ in rows]
    return np.array([float(r[3]) for r in rows]), keys


def write_joint(path, joint) -> None:
    """Nonzero joint states in canonical (pair, c1, c2) order."""
    with _open_w(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(JOINT_HEADER)
        for (i, c1, c2), prob in joint.items():
            w.writerow((i, DEGREES[c1], DEGREES[c2], repr(float(prob))))


def read_joint(path) -> dict[tuple[int, str, str], float]:
    return {(int(i), a, b): float(p) for i, a, b, p in _rows(path, JOINT_HEADER)}


@dataclass(frozen=True)
class NoteEvent:
    block: int
    position: int
    midi: int
    chord_degree: str
    junction_valid: bool | None  # validity of the junction into this block; None for block 1


def chain_events(chain) -> list[NoteEvent]:
    out = []
    for block, pos, note, c in chain.events:
        valid = None if block == 1 else chain.junction_valid[block - 2]
        out.append(NoteEvent(block, pos, note.midi, c.degree, valid))
    return out


def _flag(v: bool | None) -> str:
    return "" if v is None else ("true" if v else "false")


def write_events(path, events: Sequence[NoteEvent]) -> None:
    with _open_w(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EVENT_HEADER)
        for e in events:
            w.writerow((e.block, e.position, e.midi, e.chord_degree, _flag(e.junction_valid)))


def read_events(path) -> list[NoteEvent]:
    flags = {"": None, "true": True, "false": False}
    try:
        return [NoteEvent(int(b), int(p), int(m), d, flags[v]) for b, p, m, d, v in _rows(path, EVENT_HEADER)]
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{path}: malformed event row ({exc})") from None


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def write_json(path, data) -> None:
    with _open_w(path) as fh:
        json.dump(_jsonable(data), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None


def write_text(path, text: str) -> None:
    with _open_w(path) as fh:
        fh.write(text if text.endswith("\n") else text + "\n")


def format_table(headers: Sequence[str], rows: Sequence[Sequence], floatfmt: str = ".4f") -> str:
    """Right-aligned plain-text table."""
    def cell(v):
        if v is None:
            return "-"
        if isinstance(v, float):
            return format(v, floatfmt)
        return str(v)

    body = [[cell(v) for v in r] for r in rows]
    widths = [max(len(h), *(len(r[k]) for r in body)) if body else len(h) for k, h in enumerate(headers)]
    line = lambda cells: "  ".join(c.rjust(w) for c, w in zip(cells, widths))
    out = [line(headers), "  ".join("-" * w for w in widths)]
    out.extend(line(r) for r in body)
    return "\n".join(out)
