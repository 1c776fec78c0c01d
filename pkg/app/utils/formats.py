"""
Gorenstein formats and their regular pullbacks.

Three formats are supported:
- CI: weighted complete intersections of codimension 2, 3 or 4
- GR: the weighted Grassmannian wGr(2,5), five 4x4 Pfaffians (codimension 3)
- P2P2: the weighted Segre P2 x P2, nine 2x2 minors (codimension 4)

Half-integer parameters are stored doubled. The canonical class of every
family is (socle - sum of ambient weights) * H.
"""

import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import gcd
from typing import Dict, List, Tuple, Union

logger = logging.getLogger(__name__)

FORMAT_CI = 'CI'
FORMAT_GR = 'GR'
FORMAT_P2P2 = 'P2P2'

# Sort order of formats in census records
FORMAT_ORDER = {FORMAT_CI: 0, FORMAT_GR: 1, FORMAT_P2P2: 2}

GR_PAIRS = tuple(combinations(range(5), 2))
SEGRE_CELLS = tuple((i, j) for i in range(3) for j in range(3))


class FormatError(Exception):
    """Base class for format and pullback errors."""


class NonIntegralWeight(FormatError):
    """A pairwise sum of half-integer parameters is not an integer."""


class MissingForm(FormatError):
    """No monomial of the required degree exists in the ambient weights."""

    def __init__(self, degree: int):
        self.degree = degree
        super().__init__(f"no monomial of weighted degree {degree}")


class LinearCone(FormatError):
    """A complete intersection degree equals an ambient weight."""

    def __init__(self, degree: int):
        self.degree = degree
        super().__init__(f"degree {degree} equals an ambient weight")


class AmbientSizeMismatch(FormatError):
    """The ambient space does not have 4 + codim + 1 variables."""


@dataclass(frozen=True)
class WeightSystem:
    """Weights of a weighted projective space, sorted ascending."""
    weights: Tuple[int, ...]

    def __post_init__(self):
        ws = tuple(sorted(int(w) for w in self.weights))
        if not ws or any(w < 1 for w in ws):
            raise ValueError(f"weights must be positive integers: {self.weights}")
        object.__setattr__(self, 'weights', ws)

    @property
    def total(self) -> int:
        return sum(self.weights)

    def __len__(self) -> int:
        return len(self.weights)

    def __iter__(self):
        return iter(self.weights)

    def __getitem__(self, i: int) -> int:
        return self.weights[i]

    def indices_divisible_by(self, r: int) -> Tuple[int, ...]:
        return tuple(i for i, w in enumerate(self.weights) if w % r == 0)

    def __str__(self) -> str:
        return 'P(' + ','.join(str(w) for w in self.weights) + ')'


@dataclass(frozen=True)
class CIDescriptor:
    degrees: Tuple[int, ...]
    kind = FORMAT_CI

    def __post_init__(self):
        ds = tuple(sorted(int(d) for d in self.degrees))
        if not 2 <= len(ds) <= 4:
            raise ValueError(f"complete intersections of codimension 2..4 only, got {len(ds)}")
        if any(d < 2 for d in ds):
            raise ValueError(f"degrees must be at least 2: {ds}")
        object.__setattr__(self, 'degrees', ds)

    @property
    def codim(self) -> int:
        return len(self.degrees)

    def canonical(self) -> 'CIDescriptor':
        return self


@dataclass(frozen=True)
class GrDescriptor:
    """wGr(2,5) with parameters c_i = c2[i] / 2."""
    c2: Tuple[int, ...]
    kind = FORMAT_GR
    codim = 3

    def __post_init__(self):
        cs = tuple(sorted(int(c) for c in self.c2))
        if len(cs) != 5:
            raise ValueError(f"wGr(2,5) needs five parameters, got {len(cs)}")
        if any(cs[i] + cs[j] <= 0 for i, j in GR_PAIRS):
            raise ValueError(f"c_i + c_j must be positive: {cs}")
        object.__setattr__(self, 'c2', cs)

    @classmethod
    def from_halves(cls, values) -> 'GrDescriptor':
        return cls(tuple(int(Fraction(v) * 2) for v in values))

    @property
    def sigma2(self) -> int:
        """2 * sigma, where sigma = sum of c_i."""
        return sum(self.c2)

    def canonical(self) -> 'GrDescriptor':
        return self


@dataclass(frozen=True)
class SegreDescriptor:
    """Weighted P2 x P2 with parameters a_i = a2[i] / 2, b_j = b2[j] / 2."""
    a2: Tuple[int, ...]
    b2: Tuple[int, ...]
    kind = FORMAT_P2P2
    codim = 4

    def __post_init__(self):
        a = tuple(sorted(int(x) for x in self.a2))
        b = tuple(sorted(int(x) for x in self.b2))
        if len(a) != 3 or len(b) != 3:
            raise ValueError("P2 x P2 needs three a and three b parameters")
        if a[0] + b[0] <= 0:
            raise ValueError(f"a_i + b_j must be positive: a={a} b={b}")
        object.__setattr__(self, 'a2', a)
        object.__setattr__(self, 'b2', b)

    @classmethod
    def from_halves(cls, a, b) -> 'SegreDescriptor':
        return cls(tuple(int(Fraction(v) * 2) for v in a), tuple(int(Fraction(v) * 2) for v in b))

    def canonical(self) -> 'SegreDescriptor':
        """
        Representative of the equivalence class.

        The weights only depend on a_i + b_j, so (a + s, b - s) describes the
        same family, as does swapping a and b. The representative has
        min(a) = 0 and is the lexicographically smaller of the two orientations.
        """
        def normalized(a, b):
            shift = a[0]
            return tuple(x - shift for x in a), tuple(y + shift for y in b)

        first = normalized(self.a2, self.b2)
        second = normalized(self.b2, self.a2)
        a, b = min(first, second)
        return SegreDescriptor(a, b)


Descriptor = Union[CIDescriptor, GrDescriptor, SegreDescriptor]


@dataclass(frozen=True)
class FormatEntry:
    """One coordinate of the format: a CI slot, a Pfaffian entry x_ij or a matrix cell."""
    label: str
    position: Tuple[int, ...]
    weight: int


@dataclass(frozen=True)
class FormatFamily:
    """A format descriptor together with the ambient weights of a regular pullback."""
    descriptor: Descriptor
    ambient: WeightSystem

    def __post_init__(self):
        object.__setattr__(self, 'descriptor', self.descriptor.canonical())
        if not isinstance(self.ambient, WeightSystem):
            object.__setattr__(self, 'ambient', WeightSystem(tuple(self.ambient)))
        if len(self.ambient) != 5 + self.descriptor.codim:
            raise AmbientSizeMismatch(
                f"codimension {self.descriptor.codim} needs {5 + self.descriptor.codim} "
                f"ambient weights, got {len(self.ambient)}"
            )
        # validates integrality of the format weights
        format_weights(self.descriptor)

    @property
    def kind(self) -> str:
        return self.descriptor.kind

    @property
    def codim(self) -> int:
        return self.descriptor.codim

    def sort_key(self) -> Tuple:
        return (FORMAT_ORDER[self.kind], self.ambient.total, describe(self))

    def __str__(self) -> str:
        return describe(self)


@dataclass
class PullbackReport:
    """Outcome of validate_pullback."""
    valid: bool
    coincident: Tuple[int, ...] = ()
    general: Tuple[int, ...] = ()
    unused_ambient: Tuple[int, ...] = ()
    flags: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            'valid': self.valid,
            'coincident': list(self.coincident),
            'general': list(self.general),
            'unused_ambient': list(self.unused_ambient),
            'flags': list(self.flags),
        }


def _halve(doubled: int) -> int:
    if doubled % 2:
        raise NonIntegralWeight(f"{doubled}/2 is not an integer")
    return doubled // 2


def format_entries(d: Descriptor) -> List[FormatEntry]:
    """Format coordinates in matrix order, with their weights."""
    if d.kind == FORMAT_CI:
        return [FormatEntry(f'f{j + 1}', (j,), deg) for j, deg in enumerate(d.degrees)]
    if d.kind == FORMAT_GR:
        return [FormatEntry(f'x{i + 1}{j + 1}', (i, j), _halve(d.c2[i] + d.c2[j]))
                for i, j in GR_PAIRS]
    return [FormatEntry(f'x{i + 1}{j + 1}', (i, j), _halve(d.a2[i] + d.b2[j]))
            for i, j in SEGRE_CELLS]


def format_weights(d: Descriptor) -> Tuple[int, ...]:
    """
    Weights of the format coordinates.

    Returns:
        Sorted weights; the empty tuple for complete intersections, where the
        ambient space is the format.

    Raises:
        NonIntegralWeight: some pairwise sum is a half-integer
    """
    if d.kind == FORMAT_CI:
        return ()
    return tuple(sorted(entry.weight for entry in format_entries(d)))


def equation_degrees(d: Descriptor) -> Tuple[int, ...]:
    """Degrees of the defining equations, in equation order (not sorted)."""
    if d.kind == FORMAT_CI:
        return d.degrees
    if d.kind == FORMAT_GR:
        # Pf_k omits index k and has degree sigma - c_k
        return tuple(_halve(d.sigma2 - ck) for ck in d.c2)
    degrees = []
    for i, k in combinations(range(3), 2):
        for j, l in combinations(range(3), 2):
            degrees.append(_halve(d.a2[i] + d.a2[k] + d.b2[j] + d.b2[l]))
    return tuple(degrees)


def socle_degree(d: Descriptor) -> int:
    if d.kind == FORMAT_CI:
        return sum(d.degrees)
    if d.kind == FORMAT_GR:
        return d.sigma2
    return sum(d.a2) + sum(d.b2)


def canonical_degree(f: FormatFamily) -> int:
    return socle_degree(f.descriptor) - f.ambient.total


@lru_cache(maxsize=4096)
def _reachable(weights: Tuple[int, ...], bound: int) -> Tuple[bool, ...]:
    reach = [False] * (bound + 1)
    reach[0] = True
    for w in set(weights):
        for k in range(w, bound + 1):
            if reach[k - w]:
                reach[k] = True
    return tuple(reach)


def monomial_exists(weights, degree: int) -> bool:
    """True iff some monomial in the given weights has weighted degree `degree`."""
    if degree < 0:
        return False
    return _reachable(tuple(sorted(set(weights))), degree)[degree]


def match_coordinates(f: FormatFamily) -> Dict[str, int]:
    """
    Greedy matching of format coordinates to ambient variables.

    Entries are visited in matrix order; each takes the lowest-index unused
    ambient variable of equal weight. Unmatched entries become general forms.

    Returns:
        mapping entry label -> ambient variable index
    """
    if f.kind == FORMAT_CI:
        return {}
    used = set()
    matched = {}
    for entry in format_entries(f.descriptor):
        for i, w in enumerate(f.ambient.weights):
            if i not in used and w == entry.weight:
                used.add(i)
                matched[entry.label] = i
                break
    return matched


def validate_pullback(f: FormatFamily) -> PullbackReport:
    """
    Check that the ambient weights support a regular pullback of the format.

    Raises:
        AmbientSizeMismatch: wrong number of ambient variables
        MissingForm: a required degree has no monomial
        LinearCone: a CI degree equals an ambient weight
    """
    if len(f.ambient) != 5 + f.codim:
        raise AmbientSizeMismatch(f"{len(f.ambient)} ambient weights for codimension {f.codim}")
    weights = f.ambient.weights
    if f.kind == FORMAT_CI:
        for d in f.descriptor.degrees:
            if not monomial_exists(weights, d):
                raise MissingForm(d)
        for d in f.descriptor.degrees:
            if d in weights:
                raise LinearCone(d)
        return PullbackReport(valid=True, general=f.descriptor.degrees)

    matched = match_coordinates(f)
    coincident, general, flags = [], [], []
    for entry in format_entries(f.descriptor):
        if entry.label in matched:
            coincident.append(entry.weight)
            continue
        if not monomial_exists(weights, entry.weight):
            raise MissingForm(entry.weight)
        general.append(entry.weight)
        if entry.weight in weights:
            flags.append(f"general form {entry.label} has the weight of an ambient variable ({entry.weight})")
    used = set(matched.values())
    unused = tuple(w for i, w in enumerate(weights) if i not in used)
    return PullbackReport(valid=True, coincident=tuple(sorted(coincident)),
                          general=tuple(sorted(general)), unused_ambient=unused, flags=flags)


def wellformed_weights(weights) -> bool:
    """True iff omitting any single weight leaves gcd 1."""
    ws = list(weights)
    for i in range(len(ws)):
        g = 0
        for j, w in enumerate(ws):
            if j != i:
                g = gcd(g, w)
        if g != 1:
            return False
    return True


# Textual descriptors ---------------------------------------------------------

def _half_text(doubled: int) -> str:
    return str(doubled // 2) if doubled % 2 == 0 else f"{doubled}/2"


def _list_text(values) -> str:
    return '[' + ','.join(str(v) for v in values) + ']'


def describe(f: FormatFamily) -> str:
    """Render e.g. "CI c=2 d=[36,40] w=[5,5,7,8,9,12,31]"."""
    d = f.descriptor
    w = _list_text(f.ambient.weights)
    if d.kind == FORMAT_CI:
        return f"CI c={d.codim} d={_list_text(d.degrees)} w={w}"
    if d.kind == FORMAT_GR:
        return f"GR c={_list_text(_half_text(c) for c in d.c2)} w={w}"
    return (f"P2P2 a={_list_text(_half_text(x) for x in d.a2)} "
            f"b={_list_text(_half_text(x) for x in d.b2)} w={w}")


_FIELD_RE = re.compile(r'(\w+)=\[([^\]]*)\]')


def _doubled_values(text: str) -> Tuple[int, ...]:
    return tuple(int(Fraction(v.strip()) * 2) for v in text.split(',') if v.strip())


def _int_values(text: str) -> Tuple[int, ...]:
    return tuple(int(v) for v in text.split(',') if v.strip())


def parse_family(text: str) -> FormatFamily:
    """
    Parse a textual family descriptor (inverse of describe).

    Raises:
        ValueError: the text is not a descriptor
    """
    text = text.strip()
    kind = text.split(None, 1)[0].upper() if text else ''
    fields = dict(_FIELD_RE.findall(text))
    if 'w' not in fields:
        raise ValueError(f"descriptor without ambient weights: {text!r}")
    ambient = WeightSystem(_int_values(fields['w']))
    if kind == FORMAT_CI:
        descriptor = CIDescriptor(_int_values(fields['d']))
        codim = re.search(r'\bc=(\d+)\b', text)
        if codim and int(codim.group(1)) != descriptor.codim:
            raise ValueError(f"c={codim.group(1)} disagrees with {descriptor.codim} degrees")
    elif kind == FORMAT_GR:
        descriptor = GrDescriptor(_doubled_values(fields['c']))
    elif kind == FORMAT_P2P2:
        descriptor = SegreDescriptor(_doubled_values(fields['a']), _doubled_values(fields['b']))
    else:
        raise ValueError(f"unknown format in {text!r}")
    return FormatFamily(descriptor, ambient)


def family_key(f: FormatFamily) -> str:
    """Stable identity used for deduplication and resume."""
    return describe(f)


def ci_family(degrees, weights) -> FormatFamily:
    return FormatFamily(CIDescriptor(tuple(degrees)), WeightSystem(tuple(weights)))


def gr_family(c_halves, weights) -> FormatFamily:
    return FormatFamily(GrDescriptor.from_halves(c_halves), WeightSystem(tuple(weights)))


def segre_family(a_halves, b_halves, weights) -> FormatFamily:
    return FormatFamily(SegreDescriptor.from_halves(a_halves, b_halves), WeightSystem(tuple(weights)))

