"""Settings loaded from ~/.g2endo.ini"""
import configparser
import logging
import os
from decimal import Decimal
from dataclasses import dataclass, fields, replace

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = os.path.expanduser('~/.g2endo.ini')

# INI section for every Settings field
_SECTIONS = {
    'b_irred': 'bounds',
    'b_disc': 'bounds',
    'max_prime': 'bounds',
    'factor_cap': 'bounds',
    'galois_prime_budget': 'bounds',
    'certify_cap': 'bounds',
    'trial_bound': 'bounds',
    'tolerance': 'numeric',
    'dps': 'numeric',
    'box': 'survey',
    'workers': 'survey',
    'data_dir': 'paths',
    'log_file': 'paths',
}


@dataclass(frozen=True)
class Settings:
    b_irred: int = 59
    b_disc: int = 200
    max_prime: int = 2 ** 16
    factor_cap: int = 10 ** 30
    galois_prime_budget: int = 200
    certify_cap: int = 10 ** 4
    trial_bound: int = 10 ** 6
    tolerance: float = 1e-20
    dps: int = 60
    box: int = 10
    workers: int = 1
    data_dir: str = ''
    log_file: str = 'g2endo.log'


def load_settings(path=None):
    """
    Read settings from an INI file, falling back to defaults.

    Args:
        path (str): Config file; ~/.g2endo.ini when omitted

    Returns:
        Settings: Parsed settings
    """
    path = path or DEFAULT_CONFIG_PATH
    settings = Settings()
    if not os.path.exists(path):
        logger.info(f"No config file at {path}, using defaults")
        return settings

    config = configparser.ConfigParser()
    config.read(path)

    overrides = {}
    for field in fields(Settings):
        section = _SECTIONS[field.name]
        if not config.has_option(section, field.name):
            continue
        raw = config.get(section, field.name)
        if field.type is int:
            # accepts 1e30 without going through a float
            overrides[field.name] = int(Decimal(raw))
        elif field.type is float:
            overrides[field.name] = float(raw)
        else:
            overrides[field.name] = raw
    logger.info(f"Loaded {len(overrides)} settings from {path}")
    return replace(settings, **overrides)


def override(settings, **values):
    """Apply command-line overrides, ignoring values left as None."""
    return replace(settings, **{k: v for k, v in values.items() if v is not None})
