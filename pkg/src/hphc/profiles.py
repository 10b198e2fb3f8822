"""Row-dependent vertical step probabilities for anisotropic planar walks.

A walk at (k, j) steps horizontally to each side with probability 1/2 - p_j
and vertically to each side with probability p_j.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, NamedTuple

HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)


class LatticeSite(NamedTuple):
    k: int
    j: int


ORIGIN = LatticeSite(0, 0)


def _frac(x) -> Fraction:
    # floats go through their repr so 0.25 becomes 1/4, not a 53-bit dyadic
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class PJProfile:
    """Map j -> p_j.

    Build through the named constructors (:meth:`simple`, :meth:`comb`,
    :meth:`hphc`, :meth:`periodic`, :meth:`custom`); they validate
    0 < p_j <= 1/2 with at least one row strictly below 1/2.
    """

    kind: str
    values: tuple[Fraction, ...] = ()
    table: tuple[tuple[int, Fraction], ...] = ()
    default: Fraction = QUARTER
    _lookup: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        ps = list(self.values) + [p for _, p in self.table]
        if self.kind in ("simple", "hphc", "comb", "custom"):
            ps.append(self.default)
        if self.kind in ("hphc", "comb"):
            ps.extend([QUARTER, HALF])
        if not ps:
            raise ValueError("profile has no probabilities")
        for p in ps:
            if not 0 < p <= HALF:
                raise ValueError(f"p_j must lie in (0, 1/2], got {p}")
        if min(ps) >= HALF:
            raise ValueError("at least one p_j must be strictly below 1/2")
        self._lookup.update(self.table)

    @classmethod
    def simple(cls) -> PJProfile:
        return cls("simple", default=QUARTER)

    @classmethod
    def hphc(cls) -> PJProfile:
        """Square lattice for j >= 0, comb teeth (no horizontal edges) for j < 0."""
        return cls("hphc")

    @classmethod
    def comb(cls) -> PJProfile:
        """Horizontal motion only on the backbone row j = 0."""
        return cls("comb")

    @classmethod
    def periodic(cls, ps) -> PJProfile:
        """p_j = ps[j mod L]."""
        ps = tuple(_frac(p) for p in ps)
        if not ps:
            raise ValueError("periodic profile needs at least one value")
        return cls("periodic", values=ps)

    @classmethod
    def custom(cls, mapping: Mapping[int, object], default=QUARTER) -> PJProfile:
        table = tuple(sorted((int(j), _frac(p)) for j, p in mapping.items()))
        return cls("custom", table=table, default=_frac(default))

    def p(self, j: int) -> Fraction:
        kind = self.kind
        if kind == "simple":
            return self.default
        if kind == "hphc":
            return QUARTER if j >= 0 else HALF
        if kind == "comb":
            return QUARTER if j == 0 else HALF
        if kind == "periodic":
            return self.values[j % len(self.values)]
        return self._lookup.get(j, self.default)

    @property
    def period(self) -> int:
        return len(self.values) if self.kind == "periodic" else 0

    def distinct_values(self) -> list[Fraction]:
        if self.kind == "hphc" or self.kind == "comb":
            return [QUARTER, HALF]
        if self.kind == "periodic":
            return sorted(set(self.values))
        return sorted({self.default, *(p for _, p in self.table)})

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind == "periodic":
            d["p"] = [str(p) for p in self.values]
        elif self.kind == "custom":
            d["table"] = {str(j): str(p) for j, p in self.table}
            d["default"] = str(self.default)
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> PJProfile:
        kind = d["kind"]
        if kind == "periodic":
            return cls.periodic([Fraction(p) for p in d["p"]])
        if kind == "custom":
            return cls.custom({int(j): Fraction(p) for j, p in d["table"].items()}, Fraction(d["default"]))
        if kind not in ("simple", "hphc", "comb"):
            raise ValueError(f"unknown profile kind {kind!r}")
        return getattr(cls, kind)()

    @classmethod
    def parse(cls, text: str) -> PJProfile:
        """Parse ``simple``, ``comb``, ``hphc`` or ``periodic:1/4,1/3``."""
        name, _, rest = text.partition(":")
        name = name.strip().lower()
        if name == "periodic":
            if not rest:
                raise ValueError("periodic profile needs values, e.g. periodic:1/4,1/3")
            return cls.periodic([Fraction(x) for x in rest.split(",")])
        if name in ("simple", "comb", "hphc") and not rest:
            return getattr(cls, name)()
        raise ValueError(f"cannot parse profile {text!r}")

    def label(self) -> str:
        if self.kind == "periodic":
            return "periodic:" + ",".join(str(p) for p in self.values)
        return self.kind


def step_kernel(site: LatticeSite, profile: PJProfile) -> dict[LatticeSite, Fraction]:
    """One-step transition law from ``site``; zero-mass moves are omitted."""
    k, j = site
    p = profile.p(j)
    h = HALF - p
    out = {}
    if h:
        out[LatticeSite(k + 1, j)] = h
        out[LatticeSite(k - 1, j)] = h
    out[LatticeSite(k, j + 1)] = p
    out[LatticeSite(k, j - 1)] = p
    return out
