"""Musical domain data: notes, note pairs, diatonic triads, tonal stability and the chord grammar.

Everything here is immutable once constructed.  The default material is the
seven-note C-major set B3..A4, the seven diatonic triads and a 16-transition
functional grammar.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError

NOTE_NAMES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")


@dataclass(frozen=True, order=True)
class Note:
    midi: int

    @property
    def pitch_class(self) -> int:
        return self.midi % 12

    @property
    def name(self) -> str:
        return f"{NOTE_NAMES[self.pitch_class]}{self.midi // 12 - 1}"

    def __str__(self) -> str:
        return self.name


DEFAULT_MIDI = (59, 60, 62, 64, 65, 67, 69)
DEFAULT_NOTES: tuple[Note, ...] = tuple(Note(m) for m in DEFAULT_MIDI)


def note_from_name(name: str) -> Note:
    """Parse ``"C4"``, ``"G#3"`` or a bare MIDI number."""
    name = name.strip()
    if name.lstrip("-").isdigit():
        return Note(int(name))
    for length in (2, 1):
        head, octave = name[:length], name[length:]
        if head in NOTE_NAMES and octave.lstrip("-").isdigit():
            return Note(12 * (int(octave) + 1) + NOTE_NAMES.index(head))
    raise ConfigError(f"unrecognised note name {name!r}")


def chromatic_notes(n: int, start_midi: int = 48) -> tuple[Note, ...]:
    """``n`` consecutive semitones starting at ``start_midi``."""
    if n < 1:
        raise ConfigError("chromatic scale needs at least one note")
    return tuple(Note(start_midi + k) for k in range(n))


@dataclass(frozen=True)
class NotePair:
    n1: Note
    n2: Note
    index: int

    @property
    def interval_st(self) -> int:
        return abs(self.n1.midi - self.n2.midi)

    def __str__(self) -> str:
        return f"{self.n1},{self.n2}"


def make_pairs(notes: Sequence[Note] = DEFAULT_NOTES) -> tuple[NotePair, ...]:
    """All ordered pairs, row-major: ``index = i1 * len(notes) + i2``."""
    if not notes:
        raise ConfigError("note set is empty")
    n = len(notes)
    return tuple(NotePair(a, b, i * n + j) for i, a in enumerate(notes) for j, b in enumerate(notes))


DEFAULT_PAIRS = make_pairs()


def pair_index(notes: Sequence[Note], n1: Note, n2: Note) -> int:
    return list(notes).index(n1) * len(notes) + list(notes).index(n2)


def interval_category(pair: NotePair | int) -> str:
    """unison (0), step (1-2), skip (3-5) or leap (6+)."""
    iv = pair if isinstance(pair, (int, np.integer)) else pair.interval_st
    if iv == 0:
        return "unison"
    if iv <= 2:
        return "step"
    if iv <= 5:
        return "skip"
    return "leap"


INTERVAL_CATEGORIES = ("unison", "step", "skip", "leap")

# --- chords ---------------------------------------------------------------

QUALITIES = ("major", "minor", "diminished")
QUALITY_TEMPLATES = MappingProxyType({
    "major": (0, 4, 7),
    "minor": (0, 3, 7),
    "diminished": (0, 3, 6),
})


@dataclass(frozen=True)
class Chord:
    degree: str
    root_pc: int
    quality: str

    @property
    def index(self) -> int:
        return DEGREES.index(self.degree)

    @property
    def tones_pc(self) -> frozenset[int]:
        return frozenset((self.root_pc + t) % 12 for t in QUALITY_TEMPLATES[self.quality])

    def __str__(self) -> str:
        return self.degree


CHORDS: tuple[Chord, ...] = (
    Chord("I", 0, "major"),
    Chord("ii", 2, "minor"),
    Chord("iii", 4, "minor"),
    Chord("IV", 5, "major"),
    Chord("V", 7, "major"),
    Chord("vi", 9, "minor"),
    Chord("vii°", 11, "diminished"),
)
DEGREES = tuple(c.degree for c in CHORDS)
_ALIASES = {"vii": "vii°", "viio": "vii°", "vii0": "vii°"}


def chord(degree: str | int | Chord) -> Chord:
    """Look up a diatonic triad by degree name, index or identity."""
    if isinstance(degree, Chord):
        return degree
    if isinstance(degree, (int, np.integer)):
        return CHORDS[int(degree)]
    key = _ALIASES.get(degree.strip(), degree.strip())
    try:
        return CHORDS[DEGREES.index(key)]
    except ValueError:
        raise ConfigError(f"unknown chord degree {degree!r}") from None


def chord_tones(c: Chord | str) -> frozenset[int]:
    return chord(c).tones_pc


# --- grammar --------------------------------------------------------------

SUCCESSORS: Mapping[str, tuple[str, ...]] = MappingProxyType({
    "I": ("IV", "V", "vi"),
    "ii": ("I", "IV", "V"),
    "iii": ("IV", "vi"),
    "IV": ("I", "V"),
    "V": ("I", "vi"),
    "vi": ("ii", "IV", "V"),
    "vii°": ("I",),
})

DEFAULT_WEIGHTS: Mapping[tuple[str, str], float] = MappingProxyType({
    ("I", "IV"): 0.60, ("I", "V"): 0.90, ("I", "vi"): 0.10,
    ("ii", "I"): 0.50, ("ii", "IV"): 0.075, ("ii", "V"): 0.80,
    ("iii", "IV"): 0.70, ("iii", "vi"): 0.15,
    ("IV", "I"): 0.80, ("IV", "V"): 0.70,
    ("V", "I"): 1.00, ("V", "vi"): 0.40,
    ("vi", "ii"): 0.60, ("vi", "IV"): 0.75, ("vi", "V"): 0.50,
    ("vii°", "I"): 1.00,
})


@dataclass(frozen=True)
class TransitionGrammar:
    """7x7 chord transition weights, row = from-chord, column = to-chord."""

    T: np.ndarray = field(repr=False)

    def __post_init__(self):
        T = np.array(self.T, dtype=float)
        if T.shape != (7, 7):
            raise ConfigError(f"grammar must be 7x7, got {T.shape}")
        if np.any(T < 0) or np.any(T > 1):
            raise ConfigError("grammar weights must lie in [0, 1]")
        T.setflags(write=False)
        object.__setattr__(self, "T", T)

    @classmethod
    def default(cls) -> "TransitionGrammar":
        return cls.from_weights(DEFAULT_WEIGHTS)

    @classmethod
    def from_weights(cls, weights: Mapping[tuple[str, str], float], *, check_pattern: bool = True):
        T = np.zeros((7, 7))
        for (a, b), w in weights.items():
            T[chord(a).index, chord(b).index] = w
        g = cls(T)
        if check_pattern:
            g.check_pattern()
        return g

    def with_overrides(self, overrides: Mapping[tuple[str, str], float]) -> "TransitionGrammar":
        T = self.T.copy()
        for (a, b), w in overrides.items():
            T[chord(a).index, chord(b).index] = w
        g = TransitionGrammar(T)
        g.check_pattern()
        return g

    def check_pattern(self) -> None:
        """Raise unless the nonzero pattern is exactly the functional successor table."""
        for a in CHORDS:
            got = tuple(DEGREES[j] for j in np.flatnonzero(self.T[a.index] > 0))
            if got != SUCCESSORS[a.degree]:
                raise ConfigError(f"grammar row {a.degree}: successors {got} != {SUCCESSORS[a.degree]}")

    def weight(self, a, b) -> float:
        return float(self.T[chord(a).index, chord(b).index])

    def is_valid(self, a, b) -> bool:
        return self.weight(a, b) > 0

    @property
    def n_transitions(self) -> int:
        return int(np.count_nonzero(self.T))


def valid_successors(c: Chord | str, grammar: TransitionGrammar | None = None) -> list[Chord]:
    grammar = grammar or TransitionGrammar.default()
    row = grammar.T[chord(c).index]
    return [CHORDS[j] for j in np.flatnonzero(row > 0)]


# --- tonal stability ------------------------------------------------------

@dataclass(frozen=True)
class KKProfile:
    """Krumhansl-Kessler stability per pitch class, normalised so C = 1."""

    stability: Mapping[int, float]

    def __post_init__(self):
        stab = {int(k) % 12: float(v) for k, v in dict(self.stability).items()}
        for pc, v in stab.items():
            if not 0.0 < v <= 1.0:
                raise ConfigError(f"KK value for pc {pc} must be in (0, 1], got {v}")
        object.__setattr__(self, "stability", MappingProxyType(stab))

    def __call__(self, note: Note | int) -> float:
        pc = note.pitch_class if isinstance(note, Note) else int(note) % 12
        try:
            return self.stability[pc]
        except KeyError:
            raise ConfigError(f"no tonal-stability value for pitch class {pc}") from None

    def vector(self, notes: Iterable[Note]) -> np.ndarray:
        return np.array([self(n) for n in notes])


DEFAULT_KK = KKProfile({0: 1.00, 4: 0.96, 7: 0.82, 11: 0.75, 9: 0.50, 5: 0.42, 2: 0.35})


def strip_comment(line: str) -> str:
    """Drop a ``#`` comment; a ``#`` glued to a note name (``C#``) is kept."""
    return re.sub(r"(^|\s)#.*", "", line).strip()


@lru_cache(maxsize=1)
def chromatic_kk() -> KKProfile:
    """12-tone major-key probe-tone profile, read from the shipped data file."""
    text = resources.files("qharmony").joinpath("data/kk_chromatic.cfg").read_text(encoding="utf-8")
    raw = {}
    for line in text.splitlines():
        line = strip_comment(line)
        if not line:
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        raw[NOTE_NAMES.index(key)] = float(value)
    top = raw[0]
    return KKProfile({pc: v / top for pc, v in raw.items()})


# --- melodic penalties ----------------------------------------------------

PROX_CLASSES = ("unison", "step", "skip", "fourth", "tritone", "fifth", "sixth", "seventh+")
BASELINE_PROX: Mapping[str, float] = MappingProxyType({
    "unison": 5.0, "step": 0.0, "skip": 0.5, "fourth": 1.2,
    "tritone": 3.5, "fifth": 0.8, "sixth": 1.8, "seventh+": 2.5,
})


def prox_class(interval: int) -> str:
    if interval == 0:
        return "unison"
    if interval <= 2:
        return "step"
    if interval <= 4:
        return "skip"
    return {5: "fourth", 6: "tritone", 7: "fifth", 8: "sixth", 9: "sixth"}.get(interval, "seventh+")


@dataclass(frozen=True)
class PenaltyScheme:
    base: float = 6.0
    prox: Mapping[str, float] = BASELINE_PROX
    kk_weight: float = 1.5
    alpha_coupling: float = 0.4
    scheme_id: str = "baseline"

    def __post_init__(self):
        prox = dict(self.prox)
        missing = set(PROX_CLASSES) - set(prox)
        if missing:
            raise ConfigError(f"penalty scheme missing interval classes {sorted(missing)}")
        object.__setattr__(self, "prox", MappingProxyType(prox))

    @classmethod
    def named(cls, scheme_id: str) -> "PenaltyScheme":
        if scheme_id == "baseline":
            return cls()
        if scheme_id == "half":
            return cls(prox={k: 0.5 * v for k, v in BASELINE_PROX.items()}, scheme_id="half")
        if scheme_id == "unison_tritone_only":
            prox = {k: 1.0 for k in PROX_CLASSES}
            prox.update(unison=5.0, tritone=3.5)
            return cls(prox=prox, scheme_id="unison_tritone_only")
        raise ConfigError(f"unknown penalty scheme {scheme_id!r}")

    def scaled(self, prox_scale: float = 1.0, base: float | None = None,
               kk_weight: float | None = None) -> "PenaltyScheme":
        return PenaltyScheme(
            base=self.base if base is None else base,
            prox={k: prox_scale * v for k, v in self.prox.items()},
            kk_weight=self.kk_weight if kk_weight is None else kk_weight,
            alpha_coupling=self.alpha_coupling,
            scheme_id=self.scheme_id,
        )

    def proximity(self, interval: int) -> float:
        return self.prox[prox_class(interval)]
