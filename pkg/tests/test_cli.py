"""
Tests for the flask command-line interface.
"""

import json

from app.utils.catalog import SEGRE_MODEL
from app.utils.formats import family_key
from app.utils.report import write_records
from app.utils.search import SearchConfig, process_family


class TestHilbertCommand:

    def test_prints_plurigenera(self, runner, x36_40):
        result = runner.invoke(args=['hilbert', family_key(x36_40)])
        assert result.exit_code == 0
        assert "h0(-lK), l=1..4: [0, 0, 0, 0]" in result.output
        assert "Vanishing depth: 5" in result.output

    def test_bad_descriptor(self, runner):
        result = runner.invoke(args=['hilbert', 'not a family'])
        assert result.exit_code != 0


class TestBasketCommand:

    def test_json_report(self, runner, x36_40):
        result = runner.invoke(args=['basket', family_key(x36_40), '--json'])
        assert result.exit_code == 0
        data = json.loads(result.output)
        assert data['method'] == 'fastpath'
        assert data['basket'] == "{1/3(1,2,2,2), 8 x 1/5(2,2,3,4), 1/7(2,3,5,5), 1/31(5,7,8,12)}"

    def test_plain_report(self, runner, x16_18_20):
        result = runner.invoke(args=['basket', family_key(x16_18_20)])
        assert result.exit_code == 0
        assert "Terminal: True" in result.output


class TestQsCommand:

    def test_refuted_model_exit_code(self, runner, tmp_path):
        with open(SEGRE_MODEL, 'r', encoding='utf-8') as f:
            text = f.read().replace('x21 f6  x23', 'x21 0 x23')
        model = tmp_path / 'zero_entry.txt'
        model.write_text(text, encoding='utf-8')
        result = runner.invoke(args=['qs', '--model', str(model), '--mode', 'strata'])
        assert result.exit_code == 2
        assert '"status": "REFUTED"' in result.output

    def test_needs_family_or_model(self, runner):
        result = runner.invoke(args=['qs'])
        assert result.exit_code != 0


class TestRecordCommands:
    """Test commands that read record files."""

    def test_verify_and_report(self, runner, x36_40, tmp_path):
        outcome = process_family(x36_40, SearchConfig('ci2', 101))
        path = tmp_path / 'records.ndjson'
        write_records([outcome['record']], str(path))

        result = runner.invoke(args=['verify', str(path)])
        assert result.exit_code == 0
        assert "Basket mismatches: 0" in result.output

        result = runner.invoke(args=['report', str(path), '--out', str(tmp_path / 'summary')])
        assert result.exit_code == 0
        assert "C.I cod. 2" in result.output
        assert (tmp_path / 'summary' / 'records_empty_summary.csv').exists()
