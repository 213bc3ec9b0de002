"""Failure types shared by every module. The CLI maps QwdError to exit code 3."""

from __future__ import annotations


class QwdError(RuntimeError):
    """A numerical or storage failure; the message names the originating module."""


# -- quadrature --------------------------------------------------------------


class NonConvergence(QwdError):
    pass


class SingularIntegrand(QwdError):
    pass


# -- tfim_exact / ed_oracle --------------------------------------------------


class RecursionBreakdown(QwdError):
    pass


class DimensionTooLarge(QwdError):
    pass


# -- wasserstein -------------------------------------------------------------


class SizeMismatch(QwdError):
    pass


class NegativeVariance(QwdError):
    pass


# -- scaling -----------------------------------------------------------------


class NonPositiveData(QwdError):
    pass


class DegenerateAbscissa(QwdError):
    pass


class InsufficientPoints(QwdError):
    pass


class WindowEmpty(QwdError):
    pass


class AssumptionViolation(UserWarning):
    """Not fatal: the requested couplings sit outside the scaling regime."""


# -- store -------------------------------------------------------------------


class IoFailure(QwdError):
    pass


class VersionConflict(QwdError):
    pass
