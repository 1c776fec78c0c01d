"""
Census of isolated terminal Fano 4-folds in one Gorenstein format.

This module provides:
- SearchConfig: immutable run configuration built from the Flask config
- enumerate_families: deterministic stream of candidate families
- run_pipeline: the filter pipeline for one family
- run_census: the full run, with worker processes and resume
"""

import logging
import threading
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime
from typing import Dict, Iterator, List, Mapping, Optional, Tuple, Union

from sympy import isprime

from .basket import BasketError, BasketReport, basket_for
from .cas import Budget, BudgetExceeded, CasError, NotZeroDimensional, RankDeficient
from .formats import (
    CIDescriptor, FormatError, FormatFamily, GrDescriptor, SegreDescriptor, WeightSystem,
    canonical_degree, describe, family_key, format_weights, monomial_exists,
    parse_family, socle_degree, validate_pullback, wellformed_weights,
)
from .hilbert import FamilySeries, compute_family_series, vanishing_depth
from .orbifold import k2_point_flag
from .quasismooth import (
    INCONCLUSIVE, QS_MODES, REFUTED, QsCertificate,
    ci_quasismooth_general, verify_quasismooth,
)
from .series import SeriesError

logger = logging.getLogger(__name__)

# format selector -> (format kind, codimension)
FORMATS = {
    'ci2': ('CI', 2),
    'ci3': ('CI', 3),
    'ci4': ('CI', 4),
    'gr25': ('GR', 3),
    'p2p2': ('P2P2', 4),
}

# per-table weight bounds of the published census columns
DEFAULT_MAX_WEIGHT_SUM = {'ci2': 101, 'ci3': 70, 'ci4': 64, 'gr25': 70, 'p2p2': 57}

FILTERS = ('k0', 'k2', 'all')

EXIT_OK = 0
EXIT_ERRORS = 1
EXIT_REFUTED = 2
EXIT_BUDGET = 3


@dataclass(frozen=True)
class SearchConfig:
    """
    Configuration of one census run.

    Attributes:
        format_name: one of FORMATS
        max_weight_sum: bound W on the sum of ambient weights
        plurigenus_depth: number L of plurigenera h0(-lK) computed
        filter_mode: k0 (empty |-K|), k2 (h0(-K) >= 2) or all
        qs_mode: off, strata or full
    """
    format_name: str
    max_weight_sum: int
    index: int = 1
    plurigenus_depth: int = 4
    filter_mode: str = 'k0'
    seed: int = 20240601
    prime: int = 32003
    qs_mode: str = 'off'
    budget_spairs: int = 10 ** 6
    budget_seconds: float = 300.0
    workers: int = 1
    output_dir: str = 'instance/census'
    resume: bool = False
    retries: int = 3
    extra_terms: int = 12
    chunk_size: int = 64

    def __post_init__(self):
        if self.format_name not in FORMATS:
            raise ValueError(f"format_name must be one of {sorted(FORMATS)}, got {self.format_name!r}")
        if self.max_weight_sum < 9:
            raise ValueError(f"max_weight_sum must be at least 9, got {self.max_weight_sum}")
        if self.plurigenus_depth < 1:
            raise ValueError(f"plurigenus_depth must be at least 1, got {self.plurigenus_depth}")
        if self.index < 1:
            raise ValueError(f"index must be positive, got {self.index}")
        if self.filter_mode not in FILTERS:
            raise ValueError(f"filter_mode must be one of {FILTERS}, got {self.filter_mode!r}")
        if self.qs_mode not in QS_MODES:
            raise ValueError(f"qs_mode must be one of {QS_MODES}, got {self.qs_mode!r}")
        if self.prime != 0 and not isprime(self.prime):
            raise ValueError(f"prime must be 0 or a prime, got {self.prime}")
        if self.workers < 1:
            raise ValueError(f"workers must be at least 1, got {self.workers}")
        if self.chunk_size < 1:
            raise ValueError(f"chunk_size must be at least 1, got {self.chunk_size}")
        if self.index != 1:
            logger.warning(f"index {self.index} requested; only index 1 is validated")

    @classmethod
    def from_app_config(cls, app_config: Mapping, **overrides) -> 'SearchConfig':
        """Defaults from the CENSUS_* settings, then non-None overrides."""
        format_name = overrides.pop('format_name', None) or 'ci2'
        values = {
            'format_name': format_name,
            'max_weight_sum': DEFAULT_MAX_WEIGHT_SUM.get(format_name, 9),
            'index': app_config.get('CENSUS_INDEX', 1),
            'plurigenus_depth': app_config.get('CENSUS_PLURIGENUS_DEPTH', 4),
            'filter_mode': app_config.get('CENSUS_FILTER', 'k0'),
            'seed': app_config.get('CENSUS_SEED', 20240601),
            'prime': app_config.get('CENSUS_PRIME', 32003),
            'qs_mode': app_config.get('CENSUS_QS_MODE', 'off'),
            'budget_spairs': app_config.get('CENSUS_BUDGET_SPAIRS', 10 ** 6),
            'budget_seconds': app_config.get('CENSUS_BUDGET_SECONDS', 300.0),
            'workers': app_config.get('CENSUS_WORKERS', 1),
            'output_dir': app_config.get('CENSUS_OUTPUT_DIR', 'instance/census'),
            'retries': app_config.get('CENSUS_RETRIES', 3),
            'extra_terms': app_config.get('CENSUS_EXTRA_TERMS', 12),
            'resume': app_config.get('CENSUS_RESUME', False),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @property
    def kind(self) -> str:
        return FORMATS[self.format_name][0]

    @property
    def codim(self) -> int:
        return FORMATS[self.format_name][1]

    @property
    def run_key(self) -> str:
        """Identity of the run's results; worker count and paths do not change them."""
        return (f"{self.format_name}-W{self.max_weight_sum}-i{self.index}-L{self.plurigenus_depth}"
                f"-{self.filter_mode}-s{self.seed}-p{self.prime}-qs{self.qs_mode}-x{self.extra_terms}")

    def budget(self) -> Budget:
        return Budget(max_spairs=self.budget_spairs, max_seconds=self.budget_seconds)

    def to_dict(self) -> Dict:
        return asdict(self)


# Enumeration -----------------------------------------------------------------

def _divisors(w: int) -> List[int]:
    return [r for r in range(2, w + 1) if w % r == 0]


def _stratum_ok(weights, limit: int) -> bool:
    """No r >= 2 divides more than `limit` of the weights."""
    counts: Counter = Counter()
    for w in weights:
        counts.update(_divisors(w))
    return all(k <= limit for k in counts.values())


def _nondecreasing(length: int, total_max: int, start: int = 1, limit: Optional[int] = None,
                   fixed: Tuple[int, ...] = ()) -> Iterator[Tuple[int, ...]]:
    """
    Nondecreasing tuples with sum <= total_max.

    When `limit` is set, no r >= 2 divides more than `limit` entries of the
    tuple together with `fixed`.
    """
    counts: Counter = Counter()
    for w in fixed:
        counts.update(_divisors(w))

    def walk(prefix: List[int], low: int, remaining: int):
        slots = length - len(prefix)
        if slots == 0:
            yield tuple(prefix)
            return
        for w in range(low, remaining // slots + 1):
            divs = _divisors(w)
            if limit is not None and any(counts[r] >= limit for r in divs):
                continue
            counts.update(divs)
            prefix.append(w)
            yield from walk(prefix, w, remaining - w)
            prefix.pop()
            counts.subtract(divs)

    yield from walk([], start, total_max)


def _partitions(total: int, parts: int, low: int = 1, high: Optional[int] = None) -> Iterator[Tuple[int, ...]]:
    """Nondecreasing tuples of `parts` integers in [low, high] summing to `total`."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    top = total // parts if high is None else min(high, total // parts)
    for first in range(low, top + 1):
        for rest in _partitions(total - first, parts - 1, first, high):
            yield (first,) + rest


def _ci_degree_tuples(weights: Tuple[int, ...], codim: int, index: int) -> Iterator[Tuple[int, ...]]:
    total = sum(weights) - index
    strata = {}
    for r in {r for w in weights for r in _divisors(w)}:
        size = sum(1 for w in weights if w % r == 0)
        if size >= 2:
            strata[r] = size
    for degrees in _partitions(total, codim, 2):
        if any(d in weights or not monomial_exists(weights, d) for d in degrees):
            continue
        # X meets S_r in dimension >= |S_r| - 1 - #(degrees divisible by r)
        if any(sum(1 for d in degrees if d % r == 0) < size - 1 for r, size in strata.items()):
            continue
        yield degrees


def enumerate_ci(codim: int, max_weight_sum: int, index: int = 1) -> Iterator[FormatFamily]:
    n = 5 + codim
    for weights in _nondecreasing(n, max_weight_sum, limit=codim + 1):
        for degrees in _ci_degree_tuples(weights, codim, index):
            yield FormatFamily(CIDescriptor(degrees), WeightSystem(weights))


def _sub_multisets(values: Tuple[int, ...]) -> Iterator[Tuple[int, ...]]:
    distinct = sorted(Counter(values).items())

    def walk(i: int, chosen: List[int]):
        if i == len(distinct):
            yield tuple(chosen)
            return
        value, mult = distinct[i]
        for k in range(mult + 1):
            yield from walk(i + 1, chosen + [value] * k)

    yield from walk(0, [])


def _variables_used(family: FormatFamily) -> bool:
    """Every ambient variable is a format coordinate or occurs in a general form."""
    report = validate_pullback(family)
    weights = family.ambient.weights
    for u in report.unused_ambient:
        if not any(g >= u and monomial_exists(weights, g - u) for g in report.general):
            return False
    return True


def pullbacks(descriptor: Union[GrDescriptor, SegreDescriptor], max_weight_sum: int,
              index: int = 1) -> Iterator[FormatFamily]:
    """
    Regular pullbacks of one format with the adjunction constraint.

    A sub-multiset E of the format weights becomes general forms and new
    variables U take their place, so that the ambient has 5 + codim weights
    summing to socle + index. New weights avoid E and stay below max(E).
    """
    fw = format_weights(descriptor)
    socle = socle_degree(descriptor)
    target = socle + index
    if target > max_weight_sum:
        return
    codim = descriptor.codim
    n = 5 + codim
    seen = set()
    for removed in _sub_multisets(fw):
        extra = n - (len(fw) - len(removed))
        if extra < 0:
            continue
        kept = list(fw)
        for w in removed:
            kept.remove(w)
        u_total = target - sum(kept)
        if u_total < extra or (extra == 0 and u_total != 0):
            continue
        if not _stratum_ok(kept, codim + 1):
            continue
        high = max(removed) if removed else 0
        for extras in _partitions(u_total, extra, 1, high if extra else None):
            if set(extras) & set(removed):
                continue
            ambient = tuple(sorted(kept + list(extras)))
            if not _stratum_ok(ambient, codim + 1):
                continue
            try:
                family = FormatFamily(descriptor, WeightSystem(ambient))
                if not _variables_used(family):
                    continue
            except FormatError:
                continue
            key = family_key(family)
            if key not in seen:
                seen.add(key)
                yield family


def gr_descriptors(max_weight_sum: int, index: int = 1) -> Iterator[GrDescriptor]:
    top = max_weight_sum - index
    c0 = -((top - 8) // 3)
    while 5 * c0 <= top:
        # all doubled parameters share a parity
        for c1 in range(max(c0, 2 - c0), top + 1, 2):
            if c0 + 4 * c1 > top:
                break
            for c2 in range(c1, top + 1, 2):
                if c0 + c1 + 3 * c2 > top:
                    break
                for c3 in range(c2, top + 1, 2):
                    if c0 + c1 + c2 + 2 * c3 > top:
                        break
                    for c4 in range(c3, top - c0 - c1 - c2 - c3 + 1, 2):
                        yield GrDescriptor((c0, c1, c2, c3, c4))
        c0 += 1


def segre_descriptors(max_weight_sum: int, index: int = 1) -> Iterator[SegreDescriptor]:
    """Canonical representatives: a2[0] = 0, even entries, smaller orientation."""
    top = max_weight_sum - index
    for a1 in range(0, top + 1, 2):
        for a2 in range(a1, top + 1, 2):
            if a1 + a2 + 6 > top:
                break
            for b0 in range(2, top + 1, 2):
                if a1 + a2 + 3 * b0 > top:
                    break
                for b1 in range(b0, top + 1, 2):
                    if a1 + a2 + b0 + 2 * b1 > top:
                        break
                    for b2 in range(b1, top - a1 - a2 - b0 - b1 + 1, 2):
                        descriptor = SegreDescriptor((0, a1, a2), (b0, b1, b2))
                        if descriptor.canonical() == descriptor:
                            yield descriptor


def enumerate_families(config: SearchConfig) -> Iterator[FormatFamily]:
    """Deterministic, deduplicated stream of families for the configured format."""
    if config.kind == 'CI':
        yield from enumerate_ci(config.codim, config.max_weight_sum, config.index)
        return
    descriptors = (gr_descriptors if config.kind == 'GR' else segre_descriptors)(
        config.max_weight_sum, config.index)
    for descriptor in descriptors:
        yield from pullbacks(descriptor, config.max_weight_sum, config.index)


# Pipeline --------------------------------------------------------------------

@dataclass
class Rejection:
    """Why a family left the pipeline."""
    stage: str
    reason: str
    detail: str = ''

    def to_dict(self) -> Dict:
        return {'stage': self.stage, 'reason': self.reason, 'detail': self.detail}


@dataclass
class CandidateRecord:
    """An accepted family with everything the pipeline computed for it."""
    family: FormatFamily
    series: FamilySeries
    basket: BasketReport
    k0: bool
    k2: bool
    seed: int
    p: int
    qs: Optional[QsCertificate] = None
    timings: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.k0 and self.k2:
            raise ValueError("type K0 and type K2 are mutually exclusive")

    @property
    def h0(self) -> List[int]:
        return self.series.h0

    @property
    def type(self) -> Optional[str]:
        return 'K0' if self.k0 else 'K2' if self.k2 else None

    def sort_key(self) -> Tuple:
        return self.family.sort_key()

    def to_dict(self, include_timings: bool = False) -> Dict:
        data = {
            'key': family_key(self.family),
            'format': self.family.kind,
            'weight_sum': self.family.ambient.total,
            'canonical_degree': canonical_degree(self.family),
            'series': self.series.to_dict(),
            'h0': list(self.h0),
            'vanishing_depth': vanishing_depth(self.h0),
            'basket': self.basket.to_dict(),
            'k0': self.k0,
            'k2': self.k2,
            'type': self.type,
            'qs': self.qs.to_dict() if self.qs else None,
            'seed': self.seed,
            'p': self.p,
        }
        if include_timings:
            data['timings'] = dict(self.timings)
        return data


def _plurigenera(family: FormatFamily, config: SearchConfig) -> FamilySeries:
    series = compute_family_series(family, config.plurigenus_depth * config.index)
    if config.index != 1:
        series.h0 = [series.h0[config.index * l - 1] for l in range(1, config.plurigenus_depth + 1)]
    return series


def _certificate(family: FormatFamily, config: SearchConfig) -> QsCertificate:
    if family.kind == 'CI':
        return ci_quasismooth_general(family, config.seed, config.prime, config.budget(),
                                      defer=True, mode=config.qs_mode)
    return verify_quasismooth(family, config.seed, config.prime, config.budget(),
                              mode=config.qs_mode, extra_terms=config.extra_terms)


def run_pipeline(family: FormatFamily, config: SearchConfig) -> Union[CandidateRecord, Rejection]:
    """
    Wellformedness, plurigenera, basket, flags, type and quasismoothness.

    Rejections are returned, never raised.
    """
    timings: Dict[str, float] = {}
    started = time.perf_counter()

    try:
        validate_pullback(family)
    except FormatError as exc:
        return Rejection('pullback', type(exc).__name__, str(exc))
    if canonical_degree(family) != -config.index:
        return Rejection('adjunction', 'canonical-degree', f"K_X = {canonical_degree(family)}H")
    if not wellformed_weights(family.ambient.weights):
        return Rejection('wellformed', 'ambient-not-wellformed', str(family.ambient))

    try:
        series = _plurigenera(family, config)
    except SeriesError as exc:
        return Rejection('hilbert', type(exc).__name__, str(exc))
    timings['hilbert'] = time.perf_counter() - started
    h0_first = series.h0[0]
    if config.filter_mode == 'k0' and h0_first != 0:
        return Rejection('hilbert', 'h0-nonzero', f"h0(-K) = {h0_first}")
    if config.filter_mode == 'k2' and h0_first < 2:
        return Rejection('hilbert', 'h0-below-2', f"h0(-K) = {h0_first}")

    mark = time.perf_counter()
    try:
        basket = basket_for(family, config.seed, config.prime, config.budget(),
                            config.retries, config.extra_terms)
    except NotZeroDimensional as exc:
        return Rejection('basket', 'non-isolated', str(exc))
    except RankDeficient as exc:
        return Rejection('basket', 'singular-member', str(exc))
    except BudgetExceeded as exc:
        return Rejection('basket', 'budget', exc.reason)
    except (BasketError, CasError) as exc:
        return Rejection('basket', type(exc).__name__, str(exc))
    timings['basket'] = time.perf_counter() - mark

    if basket.basket.is_empty():
        return Rejection('basket', 'smooth', 'no orbifold points')
    if not basket.isolated:
        return Rejection('basket', 'non-isolated', str(basket.basket))
    if not basket.terminal:
        return Rejection('basket', 'non-terminal', str(basket.basket))

    k0 = h0_first == 0
    k2 = h0_first >= 2 and any(k2_point_flag(q) for q, _ in basket.basket.items())
    if config.filter_mode == 'k2' and not k2:
        return Rejection('type', 'no-k2-point', str(basket.basket))

    qs = None
    if config.qs_mode != 'off':
        mark = time.perf_counter()
        qs = _certificate(family, config)
        timings['qs'] = time.perf_counter() - mark
        if qs.status == REFUTED:
            logger.warning(f"{family}: quasismoothness refuted at {qs.witness}")

    timings['total'] = time.perf_counter() - started
    logger.debug(f"{family}: accepted with basket {basket.basket}")
    return CandidateRecord(family=family, series=series, basket=basket, k0=k0, k2=k2,
                           seed=config.seed, p=config.prime, qs=qs, timings=timings)


def process_family(family: FormatFamily, config: SearchConfig) -> Dict:
    """Pipeline outcome as a plain dict (picklable, storable)."""
    key = family_key(family)
    try:
        outcome = run_pipeline(family, config)
    except Exception as exc:
        logger.error(f"{key}: unexpected {type(exc).__name__}: {exc}")
        return {'key': key, 'accepted': False, 'rejection': None, 'record': None,
                'error': f"{key}: {type(exc).__name__}: {exc}", 'timings': {}}
    if isinstance(outcome, Rejection):
        return {'key': key, 'accepted': False, 'rejection': outcome.to_dict(), 'record': None,
                'error': None, 'timings': {}}
    return {'key': key, 'accepted': True, 'rejection': None, 'record': outcome.to_dict(),
            'error': None, 'timings': dict(outcome.timings)}


def _process_chunk(payload: Tuple[Dict, List[str]]) -> List[Dict]:
    config_data, keys = payload
    config = SearchConfig(**config_data)
    return [process_family(parse_family(key), config) for key in keys]


# Census ----------------------------------------------------------------------

@dataclass
class CensusProgress:
    """Thread-safe progress counters for long runs."""
    total: int = 0
    done: int = 0
    accepted: int = 0
    rejected: int = 0
    errors: int = 0
    started: float = field(default_factory=time.monotonic)
    log_every: int = 500
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def record(self, outcome: Dict) -> None:
        with self._lock:
            self.done += 1
            if outcome.get('error'):
                self.errors += 1
            elif outcome['accepted']:
                self.accepted += 1
            else:
                self.rejected += 1
            due = self.done % self.log_every == 0
        if due:
            self.log()

    def log(self) -> None:
        elapsed = time.monotonic() - self.started
        logger.info(f"[{datetime.now().strftime('%H:%M:%S')}] {self.done}/{self.total} families, "
                    f"{self.accepted} accepted, {self.rejected} rejected, {self.errors} errors, "
                    f"{elapsed:.1f}s")


@dataclass
class CensusResult:
    """Merged outcome of a run: sorted records, rejection counts and errors."""
    config: SearchConfig
    records: List[Dict]
    rejections: Counter
    errors: List[str]
    families: int
    elapsed_seconds: float = 0.0

    @property
    def refuted(self) -> int:
        return sum(1 for r in self.records if r['qs'] and r['qs']['status'] == REFUTED)

    @property
    def budget_exhausted(self) -> int:
        inconclusive = sum(1 for r in self.records if r['qs'] and r['qs']['status'] == INCONCLUSIVE
                           and 'budget' in r['qs']['reason'])
        return inconclusive + sum(k for (stage, reason), k in self.rejections.items() if reason == 'budget')

    @property
    def exit_code(self) -> int:
        if self.refuted:
            return EXIT_REFUTED
        if self.budget_exhausted:
            return EXIT_BUDGET
        return EXIT_OK

    def stats(self) -> Dict:
        return {
            'families': self.families,
            'accepted': len(self.records),
            'rejected': sum(self.rejections.values()),
            'errors_count': len(self.errors),
            'refuted': self.refuted,
            'budget_exhausted': self.budget_exhausted,
            'rejections': {f"{stage}:{reason}": k for (stage, reason), k in sorted(self.rejections.items())},
        }


def _chunks(keys: List[str], size: int) -> List[List[str]]:
    return [keys[i:i + size] for i in range(0, len(keys), size)]


def run_census(config: SearchConfig, store=None, progress: Optional[CensusProgress] = None) -> CensusResult:
    """
    Run the pipeline over every enumerated family.

    Args:
        config: run configuration
        store: optional persistence with completed() / save(outcome); with
            config.resume, families already stored are not recomputed
        progress: optional shared progress counters

    Returns:
        CensusResult with records sorted by (format, weight sum, descriptor)
    """
    started = time.monotonic()
    families = sorted(enumerate_families(config), key=lambda f: f.sort_key())
    keys = [family_key(f) for f in families]
    logger.info(f"Census {config.run_key}: {len(keys)} families enumerated")

    outcomes: Dict[str, Dict] = {}
    if store is not None and config.resume:
        wanted = set(keys)
        outcomes.update({k: v for k, v in store.completed().items() if k in wanted})
        logger.info(f"Resuming: {len(outcomes)} families already done")
    pending = [k for k in keys if k not in outcomes]

    progress = progress or CensusProgress()
    progress.total = len(keys)
    progress.done = len(outcomes)

    def collect(batch: List[Dict]):
        for outcome in batch:
            outcomes[outcome['key']] = outcome
            progress.record(outcome)
            if store is not None:
                store.save(outcome)

    chunks = _chunks(pending, config.chunk_size)
    if config.workers > 1 and len(chunks) > 1:
        payloads = [(config.to_dict(), chunk) for chunk in chunks]
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for batch in pool.map(_process_chunk, payloads):
                collect(batch)
    else:
        for chunk in chunks:
            collect([process_family(parse_family(key), config) for key in chunk])

    records, errors, rejections = [], [], Counter()
    for key in keys:
        outcome = outcomes[key]
        if outcome.get('error'):
            errors.append(outcome['error'])
        elif outcome['accepted']:
            records.append(outcome['record'])
        else:
            rejection = outcome['rejection']
            rejections[(rejection['stage'], rejection['reason'])] += 1

    result = CensusResult(config=config, records=records, rejections=rejections, errors=errors,
                          families=len(keys), elapsed_seconds=time.monotonic() - started)
    progress.log()
    logger.info(f"Census {config.run_key}: {len(records)} accepted, {result.refuted} refuted, "
                f"{result.budget_exhausted} budget exhausted")
    return result


def run_single(family: FormatFamily, config: SearchConfig) -> Union[CandidateRecord, Rejection]:
    """Pipeline for one family with the filter opened up."""
    return run_pipeline(family, replace(config, filter_mode='all'))
