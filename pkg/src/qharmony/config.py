"""Flat ``key = value`` run configuration with validation and flag overrides."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigError
from .music import (DEFAULT_KK, PenaltyScheme, TransitionGrammar, chord,
                    chromatic_kk, chromatic_notes, note_from_name, strip_comment)

VARIANTS = ("full", "melody_only", "harmony_only", "unconditioned")
SCHEMES = ("baseline", "half", "unison_tritone_only")


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.replace(",", " ").split())


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


@dataclass(frozen=True)
class RunConfig:
    notes: str = "B3 C4 D4 E4 F4 G4 A4"
    chromatic: int = 0                  # > 0 replaces notes by that many semitones from C3
    scheme: str = "baseline"
    base: float | None = None
    prox_scale: float = 1.0
    kk_weight: float | None = None
    kk: str = "diatonic"
    grammar: Mapping[tuple[str, str], float] = field(default_factory=dict)
    K: int = 4
    hhl_mode: str = "exact"
    m_clock: int = 6
    bias_alpha: float = 3.0
    bias_sigma: float = 2.0
    n: int = 500_000
    blocks: int = 4
    variant: str = "full"
    noise_alpha: float = 0.0
    seed: int | None = None
    out: str = "."
    trials: int = 10
    k_grid: tuple[int, ...] = (4, 6, 8, 10)
    alpha_grid: tuple[float, ...] = (0.0, 0.2, 0.5, 0.9, 1.0)
    sr_grid: tuple[int, ...] = (5, 6, 8, 10, 12, 16, 20, 24, 28, 32, 36)
    mc_samples: int = 5000

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        def need(ok, msg):
            if not ok:
                raise ConfigError(msg)

        need(self.scheme in SCHEMES, f"scheme must be one of {SCHEMES}")
        need(self.kk in ("diatonic", "chromatic"), "kk must be diatonic or chromatic")
        need(1 <= self.K <= 12, "K must be in 1..12")
        need(self.hhl_mode in ("exact", "binned"), "hhl_mode must be exact or binned")
        need(1 <= self.m_clock <= 16, "m_clock must be in 1..16")
        need(self.n >= 1, "n must be >= 1")
        need(self.blocks >= 1, "blocks must be >= 1")
        need(self.trials >= 1, "trials must be >= 1")
        need(self.mc_samples >= 1, "mc_samples must be >= 1")
        need(self.variant in VARIANTS, f"variant must be one of {VARIANTS}")
        need(0.0 <= self.noise_alpha <= 1.0, "noise_alpha must be in [0, 1]")
        need(self.prox_scale >= 0, "prox_scale must be >= 0")
        need(self.bias_sigma > 0 and self.bias_alpha >= 0, "bias_alpha >= 0 and bias_sigma > 0")
        need(self.chromatic >= 0, "chromatic must be >= 0")
        need(self.seed is None or self.seed >= 0, "seed must be non-negative")
        need(all(1 <= k <= 12 for k in self.k_grid) and self.k_grid, "k_grid entries must be in 1..12")
        need(all(0 <= a <= 1 for a in self.alpha_grid) and self.alpha_grid,
             "alpha_grid entries must be in [0, 1]")
        need(all(n >= 1 for n in self.sr_grid) and self.sr_grid, "sr_grid entries must be >= 1")
        for (a, b), w in self.grammar.items():
            chord(a), chord(b)
            need(0.0 <= w <= 1.0, f"grammar weight {a}->{b} must be in [0, 1]")
        self.note_set()

    # --- derived objects ---
    def note_set(self):
        if self.chromatic:
            return chromatic_notes(self.chromatic)
        notes = tuple(note_from_name(t) for t in self.notes.replace(",", " ").split())
        if not notes:
            raise ConfigError("empty note set")
        if len(set(notes)) != len(notes):
            raise ConfigError("duplicate notes in note set")
        return notes

    def penalty_scheme(self) -> PenaltyScheme:
        return PenaltyScheme.named(self.scheme).scaled(self.prox_scale, self.base, self.kk_weight)

    def kk_profile(self):
        return chromatic_kk() if self.kk == "chromatic" or self.chromatic else DEFAULT_KK

    def transition_grammar(self) -> TransitionGrammar:
        g = TransitionGrammar.default()
        return g.with_overrides(dict(self.grammar)) if self.grammar else g

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["grammar"] = {f"{a}->{b}": w for (a, b), w in self.grammar.items()}
        for k in ("k_grid", "alpha_grid", "sr_grid"):
            d[k] = list(d[k])
        return d


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _coerce(key: str, value: str) -> Any:
    value = value.strip()
    try:
        if key in ("base", "kk_weight"):
            return None if value.lower() in ("", "none", "default") else float(value)
        if key == "seed":
            return None if value.lower() in ("", "none") else int(value)
        if key in ("K", "m_clock", "n", "blocks", "trials", "mc_samples", "chromatic"):
            return int(value.replace("_", ""))
        if key in ("prox_scale", "bias_alpha", "bias_sigma", "noise_alpha"):
            return float(value)
        if key in ("k_grid", "sr_grid"):
            return _ints(value)
        if key == "alpha_grid":
            return _floats(value)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {value!r}") from None
    return value


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse ``key = value`` lines into RunConfig keyword arguments.

    Grammar weights use ``T.<from>.<to> = w``, e.g. ``T.vi.IV = 0.75``.
    """
    out: dict[str, Any] = {}
    grammar: dict[tuple[str, str], float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = strip_comment(raw)
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key.startswith("T."):
            parts = key.split(".")
            if len(parts) != 3:
                raise ConfigError(f"{source}:{lineno}: grammar key must be T.<from>.<to>")
            try:
                grammar[(chord(parts[1]).degree, chord(parts[2]).degree)] = float(value)
            except ValueError:
                raise ConfigError(f"{source}:{lineno}: bad grammar weight {value!r}") from None
            continue
        if key not in _FIELDS or key == "grammar":
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    if grammar:
        out["grammar"] = grammar
    return out


def load_config(path=None, overrides: Mapping[str, Any] | None = None,
                defaults: Mapping[str, Any] | None = None) -> RunConfig:
    """``defaults``, then file values (if any), then ``overrides``; ``None`` overrides are ignored."""
    kw: dict[str, Any] = dict(defaults or {})
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc}") from None
        kw.update(parse_config_text(text, str(p)))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in _FIELDS:
            raise ConfigError(f"unknown key {key!r}")
        if key == "grammar":
            kw["grammar"] = {**kw.get("grammar", {}), **value}
        else:
            kw[key] = _coerce(key, value) if isinstance(value, str) else value
    return RunConfig(**kw)


def default_config_text() -> str:
    return resources.files("qharmony").joinpath("data/default.cfg").read_text(encoding="utf-8")
