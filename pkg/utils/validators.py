"""
Input validation utilities for the cone laboratory.
"""

import os

from config.constants import CATALOG_ALGEBRAS, CATALOG_ALIASES


def is_valid_catalog_name(name):
    """
    Validate a catalog algebra name or alias.

    Args:
        name (str): Name to validate

    Returns:
        bool: True if valid, False otherwise
    """
    if not name or not isinstance(name, str):
        return False
    return CATALOG_ALIASES.get(name, name) in CATALOG_ALGEBRAS


def is_valid_size(value, minimum=1):
    """Positive integer size parameter (matrix size, spin rank, dimension)."""
    return isinstance(value, int) and not isinstance(value, bool) and value >= minimum


def is_valid_seed(seed):
    """
    Validate a seed as a 64-bit unsigned integer.

    Args:
        seed (int): Seed to validate

    Returns:
        bool: True if valid, False otherwise
    """
    return isinstance(seed, int) and not isinstance(seed, bool) and 0 <= seed < 2 ** 64


def is_valid_tolerance_pair(tol_success, tol_fail):
    """Both tolerances positive and tol_success strictly below tol_fail."""
    try:
        return 0.0 < float(tol_success) < float(tol_fail)
    except (TypeError, ValueError):
        return False


def is_valid_output_path(path):
    """
    Validate that an output path can be created.

    Args:
        path (str): Target file path

    Returns:
        bool: True if the path names a file in an existing or creatable directory
    """
    if not path or not isinstance(path, str):
        return False
    if os.path.isdir(path):
        return False
    directory = os.path.dirname(os.path.abspath(path))
    while directory and not os.path.exists(directory):
        parent = os.path.dirname(directory)
        if parent == directory:
            return False
        directory = parent
    return os.access(directory, os.W_OK)
