"""Exception types shared across the package."""

from __future__ import annotations


class KexlabError(Exception):
    """Base class for every error raised by this package."""


class BothDeltasZero(KexlabError):
    """A perturbation step was requested with no source shifted."""


class BothDeltasNonzero(KexlabError):
    """A perturbation step was requested with both sources shifted at once."""


class ZeroCurrentDelta(KexlabError):
    """Two observations carry the same current, so no slope exists."""


class NegativeResistance(KexlabError):
    """Extraction produced a non-positive resistance.

    Signals a corrupted transcript or a wrong shared-secret value: the
    measured slope magnitude was not strictly larger than r_s.
    """


class ValueNotInPalette(KexlabError):
    """A derived secret value is not a member of its public palette."""


class IncompleteRound(KexlabError):
    """A round is missing one or more of its three phase observations."""


class RoundPhaseMismatch(KexlabError):
    """Items that must share a (round, phase) context do not."""


class CrossCheckFailed(KexlabError):
    """A party's extraction is inconsistent with its own observations.

    Raised when the partner-side constitutive relation does not hold at the
    party's perturbed operating point, e.g. after phase-ordering corruption.
    """


class OutOfRange(KexlabError):
    """A modular-mode operand lies outside [0, modulus)."""


class ConfigInvalid(KexlabError):
    """An experiment config failed validation.

    Carries field-level diagnostics in ``problems`` (key -> message).
    """

    def __init__(self, problems: dict[str, str]):
        self.problems = dict(problems)
        detail = "; ".join(f"{k}: {v}" for k, v in sorted(self.problems.items()))
        super().__init__(f"invalid config: {detail}")


class FormatError(KexlabError):
    """A persisted transcript file could not be parsed.

    ``record_index`` is the zero-based index of the offending record line.
    """

    def __init__(self, message: str, record_index: int | None = None):
        self.record_index = record_index
        if record_index is not None:
            message = f"record {record_index}: {message}"
        super().__init__(message)
