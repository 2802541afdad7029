"""
Logging setup and log condensing.

The log file keeps a condensed record: warnings, errors, proofs and
completion lines. The console shows everything at INFO and above.
"""

import logging
import os
import sys
from datetime import datetime

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'

KEEP_PREFIXES = ('Proved', 'Completed')


class ProofRecordFilter(logging.Filter):
    """Passes WARNING+ records and INFO records that report a proof or a completed run."""

    def filter(self, record):
        if record.levelno >= logging.WARNING:
            return True
        return record.getMessage().startswith(KEEP_PREFIXES)


def setup_logging(log_file='g2endo.log', verbose=False):
    """
    Configure the root logger for command-line use.

    Args:
        log_file (str): Condensed log file; None disables the file log
        verbose (bool): Show DEBUG on the console
    """
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.INFO)

    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

    if log_file:
        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setLevel(logging.INFO)
        file_handler.addFilter(ProofRecordFilter())
        file_handler.setFormatter(formatter)
        root.addHandler(file_handler)

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(logging.DEBUG if verbose else logging.INFO)
    console_handler.setFormatter(formatter)
    root.addHandler(console_handler)


def condense_line(line):
    """Return the line as kept in a condensed log, or None to drop it."""
    for prefix in KEEP_PREFIXES:
        if f" - INFO - {prefix}" in line:
            return line
    if " - WARNING -" in line or " - ERROR -" in line or " - CRITICAL -" in line:
        return line
    return None


def condense_log(file_path):
    """
    Rewrite an existing log file keeping only condensed-log lines.

    The original is backed up next to it with a timestamp suffix.

    Returns:
        tuple: (original line count, kept line count, backup path)
    """
    logger = logging.getLogger(__name__)
    with open(file_path, 'r', encoding='utf-8') as f:
        content = f.read()
    original_lines = content.splitlines()

    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    backup_path = f"{file_path}.{timestamp}.bak"
    with open(backup_path, 'w', encoding='utf-8') as f:
        f.write(content)

    kept = [line for line in original_lines if condense_line(line) is not None]
    with open(file_path, 'w', encoding='utf-8') as f:
        f.write("\n".join(kept))
        if kept:
            f.write("\n")

    removed = len(original_lines) - len(kept)
    logger.info(f"Condensed {os.path.basename(file_path)}: kept {len(kept)} of {len(original_lines)} lines, removed {removed}")
    return len(original_lines), len(kept), backup_path
