"""Trace-driven experiments for predictive horizontal autoscaling."""

import csv
import io
import json
import os

from . import _core
from ._core import (
    AutoscalerConfig,
    ConfigError,
    Error,
    InsufficientData,
    IoError,
    OrderingError,
    ParseError,
    StartupError,
    TruncationError,
    ValidationError,
    constant_rate_trace,
    forecast,
    forecast_linear_raw,
    load_trace_file,
    parse_text_trace,
    rate_series,
    reactive_recommend,
    serialize_text_trace,
    slice_window,
    synthesize_bursty,
)

__all__ = [
    "AutoscalerConfig",
    "ConfigError",
    "Error",
    "InsufficientData",
    "IoError",
    "OrderingError",
    "ParseError",
    "StartupError",
    "TruncationError",
    "ValidationError",
    "compare_models",
    "constant_rate_trace",
    "forecast",
    "forecast_linear_raw",
    "load_config",
    "load_trace_file",
    "parse_binary_trace",
    "parse_text_trace",
    "penalty",
    "rate_series",
    "reactive_recommend",
    "run_experiment",
    "serialize_binary_trace",
    "serialize_text_trace",
    "slice_window",
    "synthesize_bursty",
]


def parse_binary_trace(data, layout=None, rebase=False):
    return _core.parse_binary_trace(bytes(data), json.dumps(layout or {}), rebase)


def serialize_binary_trace(seconds, layout=None):
    return _core.serialize_binary_trace(list(seconds), json.dumps(layout or {}))


def penalty(batches, timeline, failed_request_penalty=900.0, scarcity_factor=1.0):
    """Score batch results against a replica timeline.

    batches: list of dicts shaped like batches.jsonl lines.
    timeline: dict shaped like timeline.json.
    """
    return json.loads(
        _core.penalty(json.dumps(list(batches)), json.dumps(timeline),
                      failed_request_penalty, scarcity_factor))


def load_config(path):
    return json.loads(_core.load_config(os.fspath(path)))


def _config_args(config):
    if isinstance(config, (str, os.PathLike)):
        return os.fspath(config), True, ""
    return json.dumps(config), False, os.getcwd()


def run_experiment(config):
    """Run one experiment from a config file path or a config dict.

    Dict configs resolve relative paths against the working directory.

    Returns the report dict with the per-interval rows under "rows".
    """
    report, rows = _core.run_experiment(*_config_args(config))
    out = json.loads(report)
    out["rows"] = list(csv.DictReader(io.StringIO(rows)))
    return out


def compare_models(config, models=("hold", "linear", "knn"), repetitions=1):
    source, is_path, base = _config_args(config)
    return json.loads(_core.compare_models(source, list(models), repetitions, is_path, base))
