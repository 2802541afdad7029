"""Bounds and certificates for geometric endomorphism rings of genus-2 Jacobians over Q."""

__version__ = '0.1.0'

CONVENTION_ID = 'igusa-clebsch/transvectant-v1'
SCHEMA_VERSION = 1
