"""Probabilistic matching matrix over (RP, SP, context): lookup with marginal
fallback, append-only outcome recording, and periodic probability recompute.

Snapshots are immutable; record_outcome and recompute return new matrices so
readers can keep using the one they hold.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace

from .model import Context, ServicePattern

DEFAULT_SMOOTHING = 0.1

CellKey = tuple[str, str, str]  # (rpId, spId, contextKey)


@dataclass(frozen=True)
class MatchOutcome:
    rp_id: str
    sp_id: str
    context: Context
    success: bool
    quality_score: float
    difficulty: float
    timestamp: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.quality_score <= 1.0:
            raise ValueError(f"qualityScore {self.quality_score} outside [0,1]")
        if not 0.0 <= self.difficulty <= 1.0:
            raise ValueError(f"difficulty {self.difficulty} outside [0,1]")


@dataclass(frozen=True)
class Cell:
    uses: int = 0
    quality_sum: float = 0.0
    difficulty_sum: float = 0.0
    prob: float = 0.0

    def score(self) -> float:
        if self.uses == 0:
            return 0.0
        mean_quality = self.quality_sum / self.uses
        mean_difficulty = self.difficulty_sum / self.uses
        return math.sqrt(self.uses) * mean_quality * (1 + mean_difficulty)


@dataclass(frozen=True)
class MatchingMatrix:
    cells: dict[CellKey, Cell] = field(default_factory=dict)
    version: int = 0
    last_recompute: float = 0.0
    smoothing: float = DEFAULT_SMOOTHING


@dataclass(frozen=True)
class LookupResult:
    entries: tuple[tuple[str, float], ...]  # (spId, prob), prob descending
    fallback: bool = False


def lookup(m: MatchingMatrix, rp_id: str, context: Context, top_k: int) -> LookupResult:
    """Ranked SPs for the RP in this exact context, or the context-marginal
    ranking (flagged) when the exact slice is empty."""
    ctx_key = context.key()
    slice_cells = {sp: cell for (rp, sp, ck), cell in m.cells.items()
                   if rp == rp_id and ck == ctx_key}
    if slice_cells:
        ranked = sorted(slice_cells.items(), key=lambda kv: (-kv[1].prob, kv[0]))
        return LookupResult(tuple((sp, cell.prob) for sp, cell in ranked[:top_k]))

    # marginal: aggregate raw counts over every context of this RP
    agg: dict[str, Cell] = {}
    for (rp, sp, _ck), cell in m.cells.items():
        if rp != rp_id:
            continue
        prev = agg.get(sp, Cell())
        agg[sp] = Cell(prev.uses + cell.uses,
                       prev.quality_sum + cell.quality_sum,
                       prev.difficulty_sum + cell.difficulty_sum)
    if not agg:
        return LookupResult((), fallback=False)
    total = sum(c.score() + m.smoothing for c in agg.values())
    ranked = sorted(((sp, (c.score() + m.smoothing) / total) for sp, c in agg.items()),
                    key=lambda kv: (-kv[1], kv[0]))
    return LookupResult(tuple(ranked[:top_k]), fallback=True)


def record_outcome(m: MatchingMatrix, o: MatchOutcome) -> MatchingMatrix:
    """Accumulate the outcome into its cell; probabilities are untouched until
    the next recompute."""
    key = (o.rp_id, o.sp_id, o.context.key())
    cell = m.cells.get(key, Cell())
    cells = dict(m.cells)
    cells[key] = Cell(cell.uses + 1,
                      cell.quality_sum + o.quality_score,
                      cell.difficulty_sum + o.difficulty,
                      cell.prob)
    return replace(m, cells=cells)


def recompute(m: MatchingMatrix, smoothing: float = DEFAULT_SMOOTHING) -> MatchingMatrix:
    """Refresh every probability: per cell score = uses^0.5 x meanQuality x
    (1 + meanDifficulty), smoothed and normalized within each (RP, context)
    slice. Bumps the version."""
    if smoothing <= 0:
        raise ValueError("smoothing must be positive")
    slices: dict[tuple[str, str], list[CellKey]] = {}
    for key in m.cells:
        slices.setdefault((key[0], key[2]), []).append(key)
    cells: dict[CellKey, Cell] = {}
    for keys in slices.values():
        total = sum(m.cells[k].score() + smoothing for k in keys)
        for k in keys:
            cell = m.cells[k]
            cells[k] = replace(cell, prob=(cell.score() + smoothing) / total)
    return MatchingMatrix(cells=cells, version=m.version + 1,
                          last_recompute=time.time(), smoothing=smoothing)


def from_outcomes(outcomes: list[MatchOutcome],
                  smoothing: float = DEFAULT_SMOOTHING) -> MatchingMatrix:
    """Batch construction: record everything, then recompute once."""
    m = MatchingMatrix()
    for o in outcomes:
        m = record_outcome(m, o)
    return recompute(m, smoothing)


def verifying_degrees(m: MatchingMatrix) -> dict[str, float]:
    """Per SP, its best probability over every (RP, context) slice."""
    out: dict[str, float] = {}
    for (_rp, sp, _ck), cell in m.cells.items():
        out[sp] = max(out.get(sp, 0.0), cell.prob)
    return out


def apply_verifying_degrees(m: MatchingMatrix, sps: list[ServicePattern]) -> None:
    degrees = verifying_degrees(m)
    for sp in sps:
        if sp.id in degrees:
            sp.verifying_degree = degrees[sp.id]


def matrix_to_dict(m: MatchingMatrix) -> dict:
    return {
        "version": m.version,
        "lastRecompute": m.last_recompute,
        "smoothing": m.smoothing,
        "cells": [
            {"rpId": rp, "spId": sp, "contextKey": ck,
             "uses": c.uses, "qualitySum": c.quality_sum,
             "difficultySum": c.difficulty_sum, "prob": c.prob}
            for (rp, sp, ck), c in sorted(m.cells.items())
        ],
    }


def matrix_from_dict(data: dict) -> MatchingMatrix:
    cells = {
        (row["rpId"], row["spId"], row["contextKey"]):
            Cell(row["uses"], row["qualitySum"], row["difficultySum"], row["prob"])
        for row in data["cells"]
    }
    return MatchingMatrix(cells=cells, version=data["version"],
                          last_recompute=data["lastRecompute"],
                          smoothing=data.get("smoothing", DEFAULT_SMOOTHING))


def save_matrix(m: MatchingMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(matrix_to_dict(m), fh, indent=2, sort_keys=True)


def load_matrix(path) -> MatchingMatrix:
    with open(path, encoding="utf-8") as fh:
        return matrix_from_dict(json.load(fh))
