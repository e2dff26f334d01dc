#  Copyright (c) 2024 Thomas Holland
#
#  This work is licensed under the terms of the MIT license.
#  For a copy, see the accompanying LICENSE.txt file or
#  go to <https://opensource.org/licenses/MIT>.
#
"""
All exceptions raised by the library.

Verification *outcomes* (a graph failing a small cancellation condition, a certificate with
singleton buckets found by :func:`~grsc.updcert.verify_certificate`, ...) are returned as verdict
objects. Exceptions are reserved for malformed input, refused preconditions and exhausted resources.
"""
from __future__ import annotations

from typing import Any


class GrscError(Exception):
    """Base class of all library errors."""
    pass


class InvalidAlphabetError(GrscError):
    pass


class InvalidWordError(GrscError):
    pass


class InvalidPathError(GrscError):
    pass


class InvalidGraphError(GrscError):
    pass


class NotReducedError(GrscError):
    """
    Raised when an operation requires a reduced labelling and the graph has a folding violation.

    :param witness: the :class:`~grsc.core.FoldingVerdict` naming the offending vertex and edges.
    """

    def __init__(self, witness: Any, message: str | None = None):
        self.witness = witness
        if message is None:
            message = f"labelling is not reduced: {witness}"
        super().__init__(message)


class ResourceLimitError(GrscError):
    """A cycle cap, search budget or similar resource bound was exceeded."""
    pass


class InvalidCoefficientsError(GrscError):
    pass


class DisconnectedGraphError(GrscError):
    pass


class InvalidActionError(GrscError):
    pass


class LiftError(GrscError):
    """The coset action does not factor through the group presented by the graph."""
    pass


class TraceError(GrscError):
    pass


class CertificateError(GrscError):
    """
    Raised when a product certificate has buckets with a single witness.

    :param certificate: the partial certificate; its ``singletons`` list the offending buckets.
    """

    def __init__(self, certificate: Any, message: str | None = None):
        self.certificate = certificate
        if message is None:
            message = f"certificate has {len(certificate.singletons)} singleton bucket(s)"
        super().__init__(message)


class ConfigError(GrscError, ValueError):
    pass


class FileFormatError(GrscError):
    """
    A line of an artifact file could not be parsed.

    :param line_no: 1-based line number, or 0 if the error is not tied to a single line.
    :param line: the offending text.
    """

    def __init__(self, message: str, line_no: int = 0, line: str = ""):
        self.line_no = line_no
        self.line = line
        if line_no:
            message = f"line {line_no}: {message}: {line.strip()!r}"
        super().__init__(message)
