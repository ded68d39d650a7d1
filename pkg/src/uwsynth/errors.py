"""Exception hierarchy.

Every error carries a short machine-parsable ``category`` so the CLI can
emit ``<category>: <message>`` on a single stderr line.
"""

from __future__ import annotations


class UwsynthError(Exception):
    """Base class for all errors raised by this package."""

    category = "error"


class SpectralDataError(UwsynthError):
    """Malformed or inconsistent spectral data files."""

    category = "parse"


class ConfigError(UwsynthError):
    """Invalid generation configuration."""

    category = "config"


class IngestError(UwsynthError):
    """Input image could not be read or has inconsistent geometry."""

    category = "ingest"


class DomainError(UwsynthError):
    """Numeric argument outside the physical domain of an operation."""

    category = "domain"


class UnusableDepthError(DomainError):
    """Depth map contains no valid samples."""

    category = "domain"


class ContractError(UwsynthError):
    """Caller violated an interface contract (shape/grid mismatch and similar)."""

    category = "contract"


class CapacityError(UwsynthError):
    """Requested more particles than the image can hold."""

    category = "capacity"


class UnknownIdentifierError(UwsynthError):
    """Identifier (camera id, water type) not present in the library."""

    category = "lookup"


class ManifestError(UwsynthError):
    """Manifest file is malformed or references missing artifacts."""

    category = "manifest"
