"""
Tests for census summaries and record files.
"""

import pytest

from app.utils.catalog import worked
from app.utils.formats import family_key
from app.utils.search import SearchConfig
from app.utils.report import (
    census_report, combined_summary_frame, compare_with_published, empty_summary_frame,
    export_census, format_name_of, read_records, write_records,
)


def record(name, h0, depth, k0, k2, qs_status, weight_sum):
    return {
        'key': family_key(worked(name).family),
        'h0': h0,
        'vanishing_depth': depth,
        'k0': k0,
        'k2': k2,
        'qs': {'status': qs_status, 'reason': ''} if qs_status else None,
        'weight_sum': weight_sum,
    }


@pytest.fixture
def records():
    return [
        record('ci2-extreme', [0, 0, 0, 0], 5, True, False, 'VERIFIED', 77),
        record('ci3-extreme', [0, 0, 0, 1], 4, True, False, None, 61),
        record('gr25-k2', [3, 12, 35, 80], 1, False, True, 'VERIFIED', 46),
    ]


class TestCensusReport:
    """Test per-format counts."""

    def test_format_names(self, records):
        assert [format_name_of(r) for r in records] == ['ci2', 'ci3', 'gr25']

    def test_vanishing_rows(self, records):
        report = census_report(records)
        assert report['ci2']['h0_zero'] == [1, 1, 1, 1]
        assert report['ci3']['h0_zero'] == [1, 1, 1, 0]
        assert report['gr25']['h0_zero'] == [0, 0, 0, 0]

    def test_verified_counts(self, records):
        report = census_report(records)
        assert report['ci2']['qs'] == 1
        assert report['ci3']['qs'] == 0
        assert report['gr25']['qs_k2'] == 1

    def test_combined_groups(self, records):
        report = census_report(records)
        assert report['gr25']['combined'] == {'3': {'fano': 1, 'nccy3': 1, 'qs_k2': 1}}
        assert report['ci2']['combined'] == {}

    def test_extremes(self, records):
        report = census_report(records)
        assert report['ci2']['extremes']['k0']['vanishing_depth'] == 5
        assert report['gr25']['extremes']['k2']['h0'] == 3

    def test_weight_bound_from_records(self, records):
        assert census_report(records)['ci3']['W'] == 61


class TestFrames:
    """Test the summary tables."""

    def test_empty_summary(self, records):
        frame = empty_summary_frame(census_report(records))
        assert frame.loc['#Candidates', 'C.I cod. 2'] == 1
        assert frame.loc['QS Examples', 'C.I cod. 2'] == 1
        assert list(frame.columns) == ['C.I cod. 2', 'C.I cod. 3', 'Gr(2,5)']

    def test_combined_summary(self, records):
        frame = combined_summary_frame(census_report(records))
        assert len(frame) == 1
        assert frame.iloc[0]['Format'] == 'Gr(2,5)'
        assert frame.iloc[0]['#NcCY3'] == 1

    def test_differences_reported(self, records):
        notes = compare_with_published(census_report(records))
        assert "ci2: 1 candidates, published 702" in notes
        assert any(note.startswith("gr25: h0(-K) 2:") for note in notes)

    def test_filtered_run_skips_candidates(self, records):
        k0_records = [r for r in records if r['k0']]
        report = census_report(k0_records, SearchConfig('ci2', 101))
        assert report['ci2']['filter'] == 'k0'
        assert report['ci2']['candidates'] is None
        notes = compare_with_published(report)
        assert not any('candidates' in note for note in notes)
        assert not any('h0(-K) ' in note for note in notes)
        assert "ci2: h0(-lK)=0 for l<=1: 1, published 61" in notes

    def test_k2_run_compares_flagged_columns(self, records):
        notes = compare_with_published(census_report(records, filter_mode='k2'))
        assert "gr25: h0(-K) 3: (#NcCY3, #QS-K2) = (1, 1), published (6, 1)" in notes
        assert not any('h0(-lK)' in note or 'candidates' in note for note in notes)


class TestRecordFiles:
    """Test NDJSON output."""

    def test_write_and_read(self, records, tmp_path):
        path = tmp_path / 'records.ndjson'
        assert write_records(records, str(path)) == 3
        assert read_records(str(path)) == records

    def test_output_is_deterministic(self, records, tmp_path):
        first, second = tmp_path / 'a.ndjson', tmp_path / 'b.ndjson'
        write_records(records, str(first))
        write_records(records, str(second))
        assert first.read_bytes() == second.read_bytes()

    def test_export(self, records, tmp_path):
        paths = export_census(records, str(tmp_path / 'out'), prefix='sample')
        assert sorted(paths) == ['combined_summary', 'empty_summary', 'records']
        for path in paths.values():
            assert path.startswith(str(tmp_path))
        assert read_records(paths['records']) == records
