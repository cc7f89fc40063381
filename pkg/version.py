"""
Version and provenance stamps for OPA Lab reports
"""

import json
import logging
import subprocess
from datetime import datetime, timezone
from functools import lru_cache
from importlib import metadata
from pathlib import Path

logger = logging.getLogger(__name__)

PACKAGE_DIR = Path(__file__).resolve().parent
VERSION_FILE = PACKAGE_DIR / 'version.json'
NUMERIC_PACKAGES = ('numpy', 'scipy', 'mpmath', 'pandas')


class ReleaseInfo:
    """The release recorded in version.json plus the checkout it runs from"""

    def __init__(self, path=VERSION_FILE):
        self.path = Path(path)
        self.data = self._read()

    def _read(self):
        data = {'major': 0, 'minor': 0, 'patch': 0, 'release_date': None, 'git_commit': None}
        try:
            data.update(json.loads(self.path.read_text(encoding='utf-8')))
        except (OSError, json.JSONDecodeError) as e:
            logger.warning(f"Unreadable version file {self.path}: {e}")
        return data

    @property
    def number(self):
        return '{major}.{minor}.{patch}'.format(**self.data)

    @property
    def commit(self):
        return _checkout_commit() or self.data.get('git_commit')

    def describe(self):
        return {
            'version': self.number,
            'release_date': self.data.get('release_date'),
            'git_commit': self.commit,
            'display_name': f"opa-lab v{self.number}",
        }

    def stamp(self):
        """Block embedded under `generated_by` in JSON reports"""
        return {
            'version': self.number,
            'git_commit': self.commit,
            'generated_at': datetime.now(timezone.utc).isoformat(timespec='seconds'),
            'libraries': library_versions(),
        }


@lru_cache(maxsize=1)
def _checkout_commit():
    try:
        result = subprocess.run(['git', 'rev-parse', '--short', 'HEAD'], capture_output=True, text=True,
                                cwd=PACKAGE_DIR, timeout=5)
    except (subprocess.SubprocessError, OSError):
        return None
    if result.returncode != 0:
        return None
    return result.stdout.strip() or None


def library_versions():
    versions = {}
    for name in NUMERIC_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None
    return versions


release = ReleaseInfo()


def get_version():
    return release.number


def get_version_info():
    return release.describe()


def get_provenance():
    return release.stamp()
