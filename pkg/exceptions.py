"""Error taxonomy.

Every error carries a short ``detail`` message and a ``certificate`` dict with
enough data (indices, exponent lists, hashes) to reproduce the failure. The
CLI copies the certificate into the witness of the fail row.
"""
from typing import Any, Dict, Optional


def _restore(cls, state):
    error = cls.__new__(cls)
    Exception.__init__(error, state["detail"])
    error.__dict__.update(state)
    return error


class Hecke2Error(Exception):
    kind: str = "error"

    def __init__(self, detail: str, certificate: Optional[Dict[str, Any]] = None):
        super().__init__(detail)
        self.detail = detail
        self.certificate = dict(certificate or {})

    def __reduce__(self):
        # worker processes send errors back by pickle
        return (_restore, (self.__class__, self.__dict__))

    def to_witness(self) -> Dict[str, Any]:
        return {"error": self.kind, "detail": self.detail, **self.certificate}


class MalformedInput(Hecke2Error):
    kind = "malformed_input"


class DivisionImpossible(Hecke2Error):
    kind = "division_impossible"


class ShapeViolation(Hecke2Error):
    kind = "shape_violation"


class NotInMOdd(Hecke2Error):
    kind = "not_in_modd"


class TableTooSmall(Hecke2Error):
    kind = "table_too_small"


class TheoremViolated(Hecke2Error):
    kind = "theorem_violated"


class NotApplicable(Hecke2Error):
    kind = "not_applicable"


class LemmaViolated(Hecke2Error):
    kind = "lemma_violated"


class DimensionViolation(Hecke2Error):
    kind = "dimension_violation"


class BadIndex(Hecke2Error):
    kind = "bad_index"


class NotInN2(Hecke2Error):
    kind = "not_in_n2"


class ProjectionMismatch(Hecke2Error):
    kind = "projection_mismatch"


class BadPrime(Hecke2Error):
    kind = "bad_prime"


class NotInMOddSpan(Hecke2Error):
    kind = "not_in_modd_span"

    def __init__(self, exponent: int, reason: str = "even_valuation", certificate=None):
        cert = {"exponent": exponent, "reason": reason}
        cert.update(certificate or {})
        super().__init__(f"Residual series has {reason.replace('_', ' ')} at x^{exponent}", cert)
        self.exponent = exponent
        self.reason = reason


class AgreementFailure(Hecke2Error):
    kind = "agreement_failure"


class MembershipFailure(Hecke2Error):
    kind = "membership_failure"


class ClosureFailure(Hecke2Error):
    kind = "closure_failure"


class NoSolution(Hecke2Error):
    kind = "no_solution"


class NotMultiplication(Hecke2Error):
    kind = "not_multiplication"


class EquivarianceFailure(Hecke2Error):
    kind = "equivariance_failure"


class ConfigError(Hecke2Error):
    kind = "config_error"
