import json
import logging
import math
import os

import numpy as np
import pandas as pd

from config import SUPPORTED_PRECISION_BITS
from models import PNorm, RealPoly

logger = logging.getLogger(__name__)

COMMANDS = ('opa', 'extremal', 'tau', 'exclusion', 'examples', 'orbit', 'verify', 'tables', 'version')
OUTPUT_FORMATS = ('json', 'csv', 'text')


# Data validation functions
def validate_run_config(data):
    """
    Validate a run configuration before dispatch
    Returns a list of error messages (empty when valid)
    """
    errors = []

    if data.get('command') not in COMMANDS:
        errors.append(f"Unknown command: {data.get('command')!r}")

    ps = data.get('p')
    if ps is not None:
        if len(ps) == 0:
            errors.append('At least one exponent is required after --p')
        for p in ps:
            try:
                if not (math.isfinite(float(p)) and float(p) > 1):
                    errors.append(f"Exponent must satisfy 1 < p < inf: {p}")
            except (TypeError, ValueError):
                errors.append(f"Invalid exponent: {p!r}")

    ds = data.get('d')
    if ds is not None:
        if len(ds) == 0:
            errors.append('At least one degree is required after --d')
        elif min(ds) < 2:
            errors.append('Extremal degrees must be >= 2')

    if data.get('degree', 1) < 0:
        errors.append('Degree must be >= 0')

    tol = data.get('tol', 1e-11)
    if not (isinstance(tol, (int, float)) and tol > 0):
        errors.append(f"Tolerance must be positive: {tol}")

    if data.get('precision_bits', 53) not in SUPPORTED_PRECISION_BITS:
        errors.append(f"Precision must be one of {SUPPORTED_PRECISION_BITS}")

    if data.get('output_format', 'text') not in OUTPUT_FORMATS:
        errors.append(f"Output format must be one of {OUTPUT_FORMATS}")

    if data.get('budget', 40) < 0:
        errors.append('Orbit budget must be >= 0')

    if data.get('restarts', 8) < 1:
        errors.append('Restarts must be >= 1')

    return errors


def parse_degrees(text):
    """'2-6' or '2,3,4' or '3' -> list of ints"""
    degrees = []
    for part in str(text).split(','):
        part = part.strip()
        if not part:
            continue
        if '-' in part:
            lo, hi = part.split('-', 1)
            degrees.extend(range(int(lo), int(hi) + 1))
        else:
            degrees.append(int(part))
    return degrees


# Serialization
def json_safe(value):
    """Plain JSON types; floats keep their shortest round-trip repr"""
    if isinstance(value, RealPoly):
        return [float(c) for c in value.coeffs]
    if isinstance(value, PNorm):
        return value.p
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.ndarray):
        return [json_safe(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value


def dumps_records(records, provenance=None):
    payload = {'results': json_safe(records)}
    if provenance is not None:
        payload['generated_by'] = provenance
    return json.dumps(payload, ensure_ascii=False, indent=2)


def format_text(records):
    if isinstance(records, pd.DataFrame):
        return records.to_string(index=False)
    lines = []
    for record in records:
        lines.append('  '.join(f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}"
                               for k, v in json_safe(record).items()))
    return '\n'.join(lines)


# Reporting Functions
def write_report(table, path, output_format='csv', provenance=None):
    """
    Write a DataFrame (or list of records) as CSV, JSON or text
    """
    try:
        if not isinstance(table, pd.DataFrame):
            table = pd.DataFrame(json_safe(list(table)))

        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)

        if output_format == 'csv':
            table.to_csv(path, index=False, encoding='utf-8', lineterminator='\n')
        elif output_format == 'json':
            with open(path, 'w', encoding='utf-8', newline='\n') as f:
                f.write(dumps_records(table.to_dict(orient='records'), provenance))
                f.write('\n')
        else:
            with open(path, 'w', encoding='utf-8', newline='\n') as f:
                f.write(format_text(table))
                f.write('\n')

        return {
            'success': True,
            'file_path': path,
            'rows': len(table)
        }

    except Exception as e:
        logger.error(f"Report generation error for {path}: {str(e)}")
        return {
            'success': False,
            'error': str(e)
        }


def report_extension(output_format):
    return {'csv': 'csv', 'json': 'json', 'text': 'txt'}[output_format]
