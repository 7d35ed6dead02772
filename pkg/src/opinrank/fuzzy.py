"""Mamdani fuzzy grading of opinion strength.

An :class:`~opinrank.text.OpinionUnit` carries the lexicon degree of its
adjective and, optionally, of an intensifying adverb. Both degrees live on the
universe [0, 10] and are fuzzified into low/moderate/high. A rule table maps the
(adverb level, adjective level) pair to one of five output strength levels;
fired rules clip their output sets at the min of the antecedent memberships,
the clipped sets are max-aggregated, and the centroid of the aggregate gives a
crisp strength.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from .text import OpinionUnit, Polarity

__all__ = [
    "Level",
    "Granularity",
    "Orientation",
    "TriangularMF",
    "InputPartition",
    "OutputPartition",
    "RuleBase",
    "FuzzyConfig",
    "AggregateSet",
    "SentimentAssessment",
    "NoOpinionError",
    "ConfigFormatError",
    "fuzzify",
    "infer",
    "defuzzify",
    "assess",
    "granularity_of",
    "UNIVERSE",
    "INTEGRATION_STEP",
]

UNIVERSE = (0.0, 10.0)
INTEGRATION_STEP = 0.01


class NoOpinionError(ValueError):
    """The aggregated output set is identically zero; there is nothing to defuzzify."""


class ConfigFormatError(ValueError):
    pass


class Level(str, enum.Enum):
    """Input linguistic levels."""

    LOW = "L"
    MODERATE = "M"
    HIGH = "H"


class Granularity(str, enum.Enum):
    VERY_WEAK = "very_weak"
    WEAK = "weak"
    MODERATE = "moderate"
    STRONG = "strong"
    VERY_STRONG = "very_strong"

    @property
    def rank(self) -> int:
        return _GRANULARITY_ORDER.index(self)


_GRANULARITY_ORDER = list(Granularity)


class Orientation(str, enum.Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
    NEUTRAL = "Neutral"

    @classmethod
    def from_polarity(cls, polarity: Polarity, negated: bool = False) -> "Orientation":
        positive = (polarity is Polarity.POSITIVE) != negated
        return cls.POSITIVE if positive else cls.NEGATIVE


@dataclass(frozen=True)
class TriangularMF:
    a: float
    b: float
    c: float

    def __post_init__(self):
        if not self.a <= self.b <= self.c:
            raise ValueError(f"triangle needs a <= b <= c, got ({self.a}, {self.b}, {self.c})")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        a, b, c = self.a, self.b, self.c
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            left = np.where(x < b, (x - a) / (b - a) if b > a else 0.0, 1.0)
            right = np.where(x > b, (c - x) / (c - b) if c > b else 0.0, 1.0)
        mu = np.clip(np.minimum(left, right), 0.0, 1.0)
        return mu if mu.ndim else float(mu)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)


@dataclass(frozen=True)
class InputPartition:
    """Low/moderate/high sets over the degree universe.

    The default is a Ruspini partition (memberships sum to 1 everywhere). With
    a narrower moderate set such as (2.5, 5, 7.5) only one input set fires on
    [0, 2.5] and [7.5, 10], and the centroid then dips as that membership
    falls, so crisp strength stops being monotone in the input degrees.
    """

    low: TriangularMF = TriangularMF(0.0, 0.0, 5.0)
    moderate: TriangularMF = TriangularMF(0.0, 5.0, 10.0)
    high: TriangularMF = TriangularMF(5.0, 10.0, 10.0)

    def covers(self, x) -> bool:
        return any(mf(x) > 0 for mf in self.sets().values())

    def sets(self) -> dict[Level, TriangularMF]:
        return {Level.LOW: self.low, Level.MODERATE: self.moderate, Level.HIGH: self.high}


@dataclass(frozen=True)
class OutputPartition:
    very_weak: TriangularMF = TriangularMF(0.0, 0.0, 2.5)
    weak: TriangularMF = TriangularMF(0.0, 2.5, 5.0)
    moderate: TriangularMF = TriangularMF(2.5, 5.0, 7.5)
    strong: TriangularMF = TriangularMF(5.0, 7.5, 10.0)
    very_strong: TriangularMF = TriangularMF(7.5, 10.0, 10.0)

    def __post_init__(self):
        peaks = [mf.b for mf in self.sets().values()]
        if any(p >= q for p, q in zip(peaks, peaks[1:])):
            raise ValueError(f"output peaks must be strictly increasing, got {peaks}")

    def sets(self) -> dict[Granularity, TriangularMF]:
        return {g: getattr(self, g.value) for g in Granularity}


_L, _M, _H = Level.LOW, Level.MODERATE, Level.HIGH
_G = Granularity


def _default_with_modifier():
    return {
        (_L, _L): _G.VERY_WEAK, (_L, _M): _G.WEAK, (_L, _H): _G.MODERATE,
        (_M, _L): _G.WEAK, (_M, _M): _G.MODERATE, (_M, _H): _G.STRONG,
        (_H, _L): _G.MODERATE, (_H, _M): _G.STRONG, (_H, _H): _G.VERY_STRONG,
    }


def _default_without_modifier():
    return {_L: _G.WEAK, _M: _G.MODERATE, _H: _G.STRONG}


@dataclass(frozen=True)
class RuleBase:
    """``with_modifier`` is keyed by (adverb level, adjective level)."""

    with_modifier: Mapping[tuple[Level, Level], Granularity] = field(default_factory=_default_with_modifier)
    without_modifier: Mapping[Level, Granularity] = field(default_factory=_default_without_modifier)

    def __post_init__(self):
        if set(self.with_modifier) != set(itertools.product(Level, Level)):
            raise ValueError("with_modifier must define all 9 (adverb, adjective) level pairs")
        if set(self.without_modifier) != set(Level):
            raise ValueError("without_modifier must define all 3 adjective levels")

    def is_monotone(self) -> bool:
        order = list(Level)
        for i, j in itertools.product(range(3), range(3)):
            here = self.with_modifier[(order[i], order[j])].rank
            if i < 2 and self.with_modifier[(order[i + 1], order[j])].rank < here:
                return False
            if j < 2 and self.with_modifier[(order[i], order[j + 1])].rank < here:
                return False
        ranks = [self.without_modifier[lv].rank for lv in order]
        return ranks == sorted(ranks)


DEFAULT_BOUNDARIES = (2.0, 4.0, 6.0, 8.0)


@dataclass(frozen=True)
class FuzzyConfig:
    """Partitions, rules and the crisp-strength to granularity boundaries.

    ``boundaries`` are the left-closed lower edges of weak, moderate, strong and
    very strong; the last interval is closed at 10.
    """

    inputs: InputPartition = field(default_factory=InputPartition)
    outputs: OutputPartition = field(default_factory=OutputPartition)
    rules: RuleBase = field(default_factory=RuleBase)
    boundaries: tuple[float, float, float, float] = DEFAULT_BOUNDARIES
    step: float = INTEGRATION_STEP

    def __post_init__(self):
        if len(self.boundaries) != 4 or list(self.boundaries) != sorted(self.boundaries):
            raise ValueError(f"boundaries must be 4 increasing values, got {self.boundaries}")
        if not 0 < self.step <= 1:
            raise ValueError(f"integration step must be in (0, 1], got {self.step}")

    # -- plain-text key = value persistence --------------------------------
    def dumps(self) -> str:
        lines = ["# opinrank fuzzy configuration"]
        for lv, mf in self.inputs.sets().items():
            lines.append(f"input.{lv.name.lower()} = {_fmt_mf(mf)}")
        for g, mf in self.outputs.sets().items():
            lines.append(f"output.{g.value} = {_fmt_mf(mf)}")
        for (adv, adj), g in sorted(self.rules.with_modifier.items(), key=lambda kv: (kv[0][0].value, kv[0][1].value)):
            lines.append(f"rule.{adv.value}.{adj.value} = {g.value}")
        for adj, g in sorted(self.rules.without_modifier.items(), key=lambda kv: kv[0].value):
            lines.append(f"rule.none.{adj.value} = {g.value}")
        lines.append("boundaries = " + " ".join(repr(float(x)) for x in self.boundaries))
        lines.append(f"step = {self.step!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "FuzzyConfig":
        """Parse ``key = value`` lines; keys not given keep their defaults."""
        base = cls()
        inputs = dict(low=base.inputs.low, moderate=base.inputs.moderate, high=base.inputs.high)
        outputs = {g.value: mf for g, mf in base.outputs.sets().items()}
        with_mod = dict(base.rules.with_modifier)
        without_mod = dict(base.rules.without_modifier)
        boundaries, step = base.boundaries, base.step
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigFormatError(f"line {lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            try:
                parts = key.split(".")
                if parts[0] == "input" and len(parts) == 2 and parts[1] in inputs:
                    inputs[parts[1]] = _parse_mf(value)
                elif parts[0] == "output" and len(parts) == 2 and parts[1] in outputs:
                    outputs[parts[1]] = _parse_mf(value)
                elif parts[0] == "rule" and len(parts) == 3 and parts[1] == "none":
                    without_mod[Level(parts[2])] = Granularity(value)
                elif parts[0] == "rule" and len(parts) == 3:
                    with_mod[(Level(parts[1]), Level(parts[2]))] = Granularity(value)
                elif key == "boundaries":
                    boundaries = tuple(float(x) for x in value.split())
                elif key == "step":
                    step = float(value)
                else:
                    raise ConfigFormatError(f"unknown key {key!r}")
            except ConfigFormatError as exc:
                raise ConfigFormatError(f"line {lineno}: {exc}") from None
            except ValueError as exc:
                raise ConfigFormatError(f"line {lineno}: {exc}") from None
        try:
            return cls(
                inputs=InputPartition(**inputs),
                outputs=OutputPartition(**outputs),
                rules=RuleBase(with_mod, without_mod),
                boundaries=boundaries,
                step=step,
            )
        except ValueError as exc:
            raise ConfigFormatError(str(exc)) from None

    @classmethod
    def load(cls, path: str | Path) -> "FuzzyConfig":
        return cls.loads(Path(path).read_text(encoding="utf-8"))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")


def _fmt_mf(mf: TriangularMF) -> str:
    return " ".join(repr(float(v)) for v in mf.as_tuple())


def _parse_mf(value: str) -> TriangularMF:
    parts = value.split()
    if len(parts) != 3:
        raise ValueError(f"triangle needs 3 numbers, got {value!r}")
    return TriangularMF(*(float(p) for p in parts))


@dataclass(frozen=True)
class AggregateSet:
    """Pointwise max of output sets, each clipped at its firing strength."""

    clipped: tuple[tuple[TriangularMF, float], ...]

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        for mf, alpha in self.clipped:
            out = np.maximum(out, np.minimum(alpha, mf(y)))
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class SentimentAssessment:
    orientation: Orientation
    strength: float
    granularity: Granularity

    @classmethod
    def neutral(cls) -> "SentimentAssessment":
        return cls(Orientation.NEUTRAL, 0.0, Granularity.VERY_WEAK)


def _check_degree(degree: float) -> float:
    d = float(degree)
    if not (UNIVERSE[0] <= d <= UNIVERSE[1]):
        raise ValueError(f"degree {degree!r} outside the universe [0, 10]")
    return d


def fuzzify(degree: float, partition: InputPartition | None = None) -> dict[Level, float]:
    partition = partition or InputPartition()
    d = _check_degree(degree)
    return {lv: float(mf(d)) for lv, mf in partition.sets().items()}


def infer(unit: OpinionUnit, config: FuzzyConfig | None = None) -> AggregateSet:
    config = config or FuzzyConfig()
    out_sets = config.outputs.sets()
    adj_mu = fuzzify(unit.degree, config.inputs)
    # max-combine firing strengths of rules sharing a consequent, then clip
    firing: dict[Granularity, float] = {}
    if unit.modifier_degree is None:
        for lv, mu in adj_mu.items():
            if mu > 0:
                g = config.rules.without_modifier[lv]
                firing[g] = max(firing.get(g, 0.0), mu)
    else:
        adv_mu = fuzzify(unit.modifier_degree, config.inputs)
        for (adv, adj), g in config.rules.with_modifier.items():
            alpha = min(adv_mu[adv], adj_mu[adj])
            if alpha > 0:
                firing[g] = max(firing.get(g, 0.0), alpha)
    return AggregateSet(tuple((out_sets[g], firing[g]) for g in Granularity if g in firing))


def defuzzify(mu: Callable, step: float = INTEGRATION_STEP) -> float:
    """Centroid of ``mu`` over [0, 10] by a midpoint sum with the given step."""
    lo, hi = UNIVERSE
    n = int(round((hi - lo) / step))
    y = lo + (np.arange(n) + 0.5) * step
    m = np.asarray(mu(y), dtype=float)
    total = m.sum()
    if not total > 0:
        raise NoOpinionError("membership function is identically zero")
    return float((y * m).sum() / total)


def granularity_of(strength: float, boundaries=DEFAULT_BOUNDARIES) -> Granularity:
    idx = int(np.searchsorted(np.asarray(boundaries, dtype=float), strength, side="right"))
    return _GRANULARITY_ORDER[idx]


def assess(unit: OpinionUnit, config: FuzzyConfig | None = None) -> SentimentAssessment:
    config = config or FuzzyConfig()
    try:
        strength = defuzzify(infer(unit, config), config.step)
    except NoOpinionError:
        return SentimentAssessment.neutral()
    return SentimentAssessment(
        Orientation.from_polarity(unit.polarity, unit.negated),
        strength,
        granularity_of(strength, config.boundaries),
    )


def with_degrees(unit: OpinionUnit, degree: float, modifier_degree: float | None) -> OpinionUnit:
    """Copy of ``unit`` with substituted degrees (handy for sweeps)."""
    return replace(unit, degree=degree, modifier_degree=modifier_degree)
