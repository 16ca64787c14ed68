"""Configuration loading and saving."""

import json
import logging
import os
from pathlib import Path

logger = logging.getLogger(__name__)

CONFIG_DIR = Path.home() / ".config" / "qikit"
CONFIG_FILE = CONFIG_DIR / "config.json"
MAX_QUBITS_ENV = "QIKIT_MAX_QUBITS"

DEFAULT_CONFIG = {
    "tol": 1e-6,
    "cp_tol": 1e-8,
    "rank_tol": 1e-6,
    "p_floor": 1e-12,
    "p_min": 1e-12,
    "max_qubits": 6,
    "shots": 1000,
    "seed": 0,
}


def load_config() -> dict:
    try:
        with open(CONFIG_FILE) as f:
            return {**DEFAULT_CONFIG, **json.load(f)}
    except (FileNotFoundError, json.JSONDecodeError):
        return dict(DEFAULT_CONFIG)


def save_config(config: dict) -> None:
    CONFIG_DIR.mkdir(parents=True, exist_ok=True)
    with open(CONFIG_FILE, "w") as f:
        json.dump(config, f, indent=2)


def max_qubits() -> int:
    """Dense-storage guard: QIKIT_MAX_QUBITS wins over the config file."""
    raw = os.environ.get(MAX_QUBITS_ENV)
    if raw is not None:
        try:
            return int(raw)
        except ValueError:
            logger.warning("Ignoring non-integer %s=%r", MAX_QUBITS_ENV, raw)
    return int(load_config().get("max_qubits", DEFAULT_CONFIG["max_qubits"]))
