import json
import math

import numpy as np
import pandas as pd
import pytest

from config import (DevelopmentConfig, ExtremalConfig, SolverConfig, TestingConfig, get_config)
from models import PNorm, RealPoly
from utils import (dumps_records, json_safe, parse_degrees, report_extension, validate_run_config,
                   write_report)
from version import get_provenance, get_version, get_version_info


def valid_config(**overrides):
    data = {'command': 'tau', 'p': [4.0], 'd': None, 'degree': 1, 'tol': 1e-11,
            'precision_bits': 53, 'output_format': 'text', 'budget': 40, 'restarts': 8}
    data.update(overrides)
    return data


class TestValidation:
    def test_valid(self):
        assert validate_run_config(valid_config()) == []

    @pytest.mark.parametrize('overrides,fragment', [
        ({'command': 'plot'}, 'Unknown command'),
        ({'p': []}, 'At least one exponent'),
        ({'p': [1.0]}, '1 < p < inf'),
        ({'p': [math.inf]}, '1 < p < inf'),
        ({'d': [1, 2]}, 'degrees must be >= 2'),
        ({'tol': 0.0}, 'Tolerance must be positive'),
        ({'precision_bits': 64}, 'Precision must be one of'),
        ({'output_format': 'xml'}, 'Output format'),
        ({'budget': -1}, 'budget'),
        ({'restarts': 0}, 'Restarts'),
    ])
    def test_errors(self, overrides, fragment):
        errors = validate_run_config(valid_config(**overrides))
        assert len(errors) == 1
        assert fragment in errors[0]

    def test_degrees(self):
        assert parse_degrees('2-4') == [2, 3, 4]
        assert parse_degrees('2,5') == [2, 5]
        assert parse_degrees('3') == [3]


class TestSerialization:
    def test_json_safe(self):
        assert json_safe(RealPoly((1.0, 2.5))) == [1.0, 2.5]
        assert json_safe(PNorm(4)) == 4.0
        assert json_safe(np.float64(0.1)) == 0.1
        assert json_safe(np.int64(3)) == 3
        assert json_safe({'x': math.nan}) == {'x': None}

    def test_round_trip_is_bit_exact(self):
        records = [{'p': 4.0, 'tau': 1.2115712345678901, 'coeffs': [1.0, 1 / 3, 2 / 7]}]
        text = dumps_records(records)
        parsed = json.loads(text)
        assert parsed['results'][0]['tau'] == records[0]['tau']
        assert dumps_records(parsed['results']) == text

    def test_extension(self):
        assert report_extension('text') == 'txt'
        assert report_extension('csv') == 'csv'


class TestReports:
    def test_csv(self, tmp_path):
        path = tmp_path / 'out' / 'table.csv'
        result = write_report(pd.DataFrame({'p': [4.0], 's': [1.5789]}), str(path), 'csv')
        assert result['success']
        assert result['rows'] == 1
        raw = path.read_bytes()
        assert raw.startswith(b'p,s\n')
        assert b'\r\n' not in raw

    def test_json_with_provenance(self, tmp_path):
        path = tmp_path / 'table.json'
        result = write_report([{'p': 4.0, 'tau': 1.21157}], str(path), 'json', get_provenance())
        assert result['success']
        payload = json.loads(path.read_text(encoding='utf-8'))
        assert payload['results'] == [{'p': 4.0, 'tau': 1.21157}]
        assert payload['generated_by']['version'] == get_version()

    def test_failure_is_reported(self, tmp_path):
        result = write_report(pd.DataFrame({'p': [4.0]}), str(tmp_path), 'csv')
        assert result['success'] is False
        assert result['error']


class TestConfig:
    def test_selection(self):
        assert get_config('testing') is TestingConfig
        assert get_config('nonexistent') is DevelopmentConfig
        assert TestingConfig.TESTING

    def test_value_objects(self):
        cfg = TestingConfig.solver_config()
        assert cfg.tol == TestingConfig.TOL
        assert cfg.with_overrides(tol=1e-6).tol == 1e-6
        assert cfg.tol == TestingConfig.TOL
        assert SolverConfig().bracket == (-2.5, 2.5)
        assert ExtremalConfig().extended_bits == 256
        assert TestingConfig.orbit_config().max_nodes == 500


class TestVersion:
    def test_version_string(self):
        assert len(get_version().split('.')) == 3

    def test_info(self):
        info = get_version_info()
        assert info['display_name'].endswith(get_version())
        stamp = get_provenance()
        assert set(stamp) == {'version', 'git_commit', 'generated_at', 'libraries'}
        assert set(stamp['libraries']) == {'numpy', 'scipy', 'mpmath', 'pandas'}
