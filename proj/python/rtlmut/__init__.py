"""Python face of the RTL mutation campaign core.

The native module exchanges JSON strings; this wrapper turns them into plain
dicts and lists.
"""

import json

from ._core import (  # noqa: F401
    BaselineGateFailed,
    ConfigError,
    Error,
    IndexMalformed,
    PartitionInvalid,
    StorageError,
    __version__,
    normalize_block,
    sha256_hex,
    spread_entropy,
)
from . import _core


def split_text(text, source_id, chunk_size=200, aux_lines=5, context_window=400):
    """Partition HDL text into regions. Returns the partition as a dict."""
    return json.loads(_core.split_text(text, source_id, chunk_size, aux_lines, context_window))


def validate_partition(text, partition):
    """Check a partition (dict) against its source. Returns a list of defects."""
    return json.loads(_core.validate_partition(text, json.dumps(partition)))


def load_catalog(path):
    """Load and validate a mutation catalog file. Returns it as a dict."""
    return json.loads(_core.load_catalog(str(path)))


def cache_entries(path):
    """Replay a mutation cache log. Returns its entries as a list of dicts."""
    return json.loads(_core.cache_entries(str(path)))


def run_campaign(config_path, mode="", parallelism="", scenarios=-1, max_retries=-1):
    """Run a campaign from a config file. Returns the outcome as a dict."""
    return json.loads(
        _core.run_campaign(str(config_path), mode, parallelism, scenarios, max_retries)
    )


def report_from_logs(cache_path, scenarios_path="", mtrs=None, max_retries=2, window=25):
    """Rebuild the metrics report from log files. Returns it as a dict.

    `mtrs` maps design id to a list of {module_id, start_line, end_line} dicts.
    """
    mtrs_json = json.dumps(mtrs) if mtrs else ""
    return json.loads(
        _core.report_from_logs(str(cache_path), str(scenarios_path), mtrs_json, max_retries, window)
    )
