#pragma once

#include <stdexcept>
#include <string>

namespace domred {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define DOMRED_DEFINE_ERROR(name)          \
    struct name : Error {                  \
        using Error::Error;                \
    };

DOMRED_DEFINE_ERROR(DimensionMismatch)
DOMRED_DEFINE_ERROR(SingularResolvent)
DOMRED_DEFINE_ERROR(EigenFailure)
DOMRED_DEFINE_ERROR(BoundaryEigenvalue)
DOMRED_DEFINE_ERROR(SylvesterFailure)
DOMRED_DEFINE_ERROR(UnstableA)
DOMRED_DEFINE_ERROR(NearSingularSpectrum)
DOMRED_DEFINE_ERROR(OrderTooSmall)
DOMRED_DEFINE_ERROR(BoundaryPole)
DOMRED_DEFINE_ERROR(BisectionStall)
DOMRED_DEFINE_ERROR(GridUnderflow)
DOMRED_DEFINE_ERROR(StructureMismatch)
DOMRED_DEFINE_ERROR(CertificateInvalid)
DOMRED_DEFINE_ERROR(StepTooLarge)
DOMRED_DEFINE_ERROR(Divergence)
DOMRED_DEFINE_ERROR(TooShort)
DOMRED_DEFINE_ERROR(ParseError)
DOMRED_DEFINE_ERROR(UnknownNonlinearityKind)
DOMRED_DEFINE_ERROR(PoleHit)

#undef DOMRED_DEFINE_ERROR

}  // namespace domred
