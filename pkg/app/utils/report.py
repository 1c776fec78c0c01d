"""
Census summaries and record files.

Records are written as newline-delimited JSON with sorted keys, so two runs
with the same configuration produce byte-identical files. Summaries are
pandas DataFrames exported as CSV:
- the empty-linear-system summary (one column per format)
- the combined summary of families with h0(-K) >= 2 (rows per format and h0)
"""

import json
import logging
import os
from collections import defaultdict
from typing import Dict, Iterable, List, Optional

import pandas as pd

from .formats import FORMAT_CI, FORMAT_GR, parse_family
from .quasismooth import VERIFIED

logger = logging.getLogger(__name__)

# records written under the k0 or k2 filter miss the other families
FILTER_ALL = 'all'

FORMAT_COLUMNS = {
    'ci2': 'C.I cod. 2',
    'ci3': 'C.I cod. 3',
    'ci4': 'C.I cod. 4',
    'gr25': 'Gr(2,5)',
    'p2p2': 'P2 x P2',
}

VANISHING_ROWS = 4

# Published counts of the empty-linear-system summary, per format column
PUBLISHED_EMPTY_SUMMARY = {
    'ci2': {'W': 101, 'candidates': 702, 'h0_zero': [61, 16, 2, 1], 'qs': 80},
    'ci3': {'W': 70, 'candidates': 78, 'h0_zero': [7, 3, 3, 0], 'qs': 13},
    'gr25': {'W': 70, 'candidates': 295, 'h0_zero': [1], 'qs': 1},
    'p2p2': {'W': 57, 'candidates': 176, 'h0_zero': [1], 'qs': 1},
}

# Published (#Fano, #NcCY3, #QS-K2) per format and h0(-K) group
PUBLISHED_COMBINED_SUMMARY = {
    'ci2': {'2': (198, 13, 12), '3..7': (73, 0, 0)},
    'ci3': {'2': (22, 13, 7), '3..8': (5, 1, 1)},
    'ci4': {'2': (6, 6, 0), '3': (1, 1, 0)},
    'gr25': {'2': (104, 20, 6), '3': (75, 6, 1)},
    'p2p2': {'2': (58, 30, 3), '3': (56, 10, 1), '4': (21, 4, 1)},
}


def format_name_of(record: Dict) -> str:
    """Format selector (ci2, ..., p2p2) of a record."""
    family = parse_family(record['key'])
    if family.kind == FORMAT_CI:
        return f"ci{family.codim}"
    return 'gr25' if family.kind == FORMAT_GR else 'p2p2'


def _verified(record: Dict) -> bool:
    return bool(record.get('qs')) and record['qs']['status'] == VERIFIED


def _h0_group(h0: int, top: int) -> str:
    if h0 == 2:
        return '2'
    return '3' if top == 3 else f"3..{top}"


def census_report(records: Iterable[Dict], config=None, filter_mode: Optional[str] = None) -> Dict[str, Dict]:
    """
    Per-format counts of a completed run.

    The filter the records were written under (from `filter_mode`, else from
    `config`, else 'all') decides which counts are complete. Candidates are
    only counted for unfiltered runs and are None otherwise.

    Returns:
        {format: {candidates, h0_zero (counts with h0(-lK) = 0 for l <= n,
        n = 1..4), qs, k0, k2, combined, extremes, W, filter}}
    """
    if filter_mode is None:
        filter_mode = config.filter_mode if config is not None else FILTER_ALL
    grouped: Dict[str, List[Dict]] = defaultdict(list)
    for record in records:
        grouped[format_name_of(record)].append(record)

    report = {}
    for name in sorted(grouped, key=list(FORMAT_COLUMNS).index):
        rows = grouped[name]
        h0_zero = [sum(1 for r in rows if r['vanishing_depth'] > n) for n in range(1, VANISHING_ROWS + 1)]
        k0 = [r for r in rows if r['k0']]
        k2 = [r for r in rows if r['h0'][0] >= 2]

        combined = {}
        top = max((r['h0'][0] for r in k2), default=2)
        for r in k2:
            group = _h0_group(r['h0'][0], top)
            counts = combined.setdefault(group, {'fano': 0, 'nccy3': 0, 'qs_k2': 0})
            counts['fano'] += 1
            if r['k2']:
                counts['nccy3'] += 1
                if _verified(r):
                    counts['qs_k2'] += 1

        extremes = {}
        if k0:
            deepest = max(r['vanishing_depth'] for r in k0)
            extremes['k0'] = {'vanishing_depth': deepest,
                              'families': [r['key'] for r in k0 if r['vanishing_depth'] == deepest]}
        k2_flagged = [r for r in k2 if r['k2']]
        if k2_flagged:
            highest = max(r['h0'][0] for r in k2_flagged)
            extremes['k2'] = {'h0': highest,
                              'families': [r['key'] for r in k2_flagged if r['h0'][0] == highest]}

        report[name] = {
            'W': config.max_weight_sum if config is not None and config.format_name == name
            else max(r['weight_sum'] for r in rows),
            'candidates': len(rows) if filter_mode == FILTER_ALL else None,
            'h0_zero': h0_zero,
            'qs': sum(1 for r in rows if _verified(r)),
            'qs_k0': sum(1 for r in k0 if _verified(r)),
            'qs_k2': sum(1 for r in rows if r['k2'] and _verified(r)),
            'k0': len(k0),
            'k2': sum(1 for r in rows if r['k2']),
            'combined': combined,
            'extremes': extremes,
            'filter': filter_mode,
        }
    return report


def empty_summary_frame(report: Dict[str, Dict]) -> pd.DataFrame:
    """Candidates, W, vanishing rows and QS examples; one column per format."""
    index = ['#Candidates', 'W', 'h0(-K)=0'] + [f"h0(-lK)=0, l<={n}" for n in range(2, VANISHING_ROWS + 1)]
    index.append('QS Examples')
    columns = {}
    for name, counts in report.items():
        columns[FORMAT_COLUMNS[name]] = [counts['candidates'], counts['W']] + counts['h0_zero'] + [counts['qs']]
    return pd.DataFrame(columns, index=index)


def combined_summary_frame(report: Dict[str, Dict]) -> pd.DataFrame:
    """Families with h0(-K) >= 2 grouped by format and h0(-K)."""
    rows = []
    for name, counts in report.items():
        for group, values in sorted(counts['combined'].items()):
            rows.append({
                'Format': FORMAT_COLUMNS[name],
                'W': counts['W'],
                'h0(-K)': group,
                '#Fano': values['fano'],
                '#NcCY3': values['nccy3'],
                '#QS-K2': values['qs_k2'],
            })
    return pd.DataFrame(rows, columns=['Format', 'W', 'h0(-K)', '#Fano', '#NcCY3', '#QS-K2'])


def compare_with_published(report: Dict[str, Dict]) -> List[str]:
    """
    Differences between computed and published counts, as readable lines.

    Counts a filtered run cannot know are skipped: candidates unless the
    filter is 'all', the vanishing rows under 'k2', the combined table under
    'k0' and its #Fano column under 'k2'.
    """
    notes = []
    for name, counts in report.items():
        filter_mode = counts.get('filter', FILTER_ALL)
        published = PUBLISHED_EMPTY_SUMMARY.get(name)
        if published and filter_mode != 'k2':
            if counts['W'] != published['W']:
                notes.append(f"{name}: run at W={counts['W']}, published table uses W={published['W']}")
            if counts['candidates'] is not None and counts['candidates'] != published['candidates']:
                notes.append(f"{name}: {counts['candidates']} candidates, published {published['candidates']}")
            for n, expected in enumerate(published['h0_zero'], start=1):
                if counts['h0_zero'][n - 1] != expected:
                    notes.append(f"{name}: h0(-lK)=0 for l<={n}: {counts['h0_zero'][n - 1]}, published {expected}")
            if counts['qs'] != published['qs']:
                notes.append(f"{name}: {counts['qs']} QS examples, published {published['qs']}")
        if filter_mode == 'k0':
            continue
        for group, expected in PUBLISHED_COMBINED_SUMMARY.get(name, {}).items():
            values = counts['combined'].get(group)
            got = (values['fano'], values['nccy3'], values['qs_k2']) if values else (0, 0, 0)
            if filter_mode != FILTER_ALL:
                got, expected = got[1:], tuple(expected[1:])
            if got != expected:
                columns = '(#Fano, #NcCY3, #QS-K2)' if filter_mode == FILTER_ALL else '(#NcCY3, #QS-K2)'
                notes.append(f"{name}: h0(-K) {group}: {columns} = {got}, published {expected}")
    return notes


def write_records(records: Iterable[Dict], path: str) -> int:
    """NDJSON, one record per line, keys sorted."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    count = 0
    with open(path, 'w', encoding='utf-8') as f:
        for record in records:
            f.write(json.dumps(record, sort_keys=True) + '\n')
            count += 1
    return count


def read_records(path: str) -> List[Dict]:
    with open(path, 'r', encoding='utf-8') as f:
        return [json.loads(line) for line in f if line.strip()]


def export_census(records: List[Dict], output_dir: str, config=None,
                  prefix: Optional[str] = None) -> Dict[str, str]:
    """
    Write the record file and both summary CSVs.

    Returns:
        paths by kind: records, empty_summary, combined_summary
    """
    os.makedirs(output_dir, exist_ok=True)
    prefix = prefix or (config.run_key if config is not None else 'census')
    paths = {
        'records': os.path.join(output_dir, f"{prefix}.ndjson"),
        'empty_summary': os.path.join(output_dir, f"{prefix}_empty_summary.csv"),
        'combined_summary': os.path.join(output_dir, f"{prefix}_combined_summary.csv"),
    }
    write_records(records, paths['records'])
    report = census_report(records, config)
    empty_summary_frame(report).to_csv(paths['empty_summary'])
    combined_summary_frame(report).to_csv(paths['combined_summary'], index=False)
    for note in compare_with_published(report):
        logger.info(f"Published table difference: {note}")
    logger.info(f"Exported {len(records)} records to {paths['records']}")
    return paths
