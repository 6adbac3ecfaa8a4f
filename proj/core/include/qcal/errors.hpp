#pragma once

#include <stdexcept>
#include <string>

namespace qcal {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define QCAL_DEFINE_ERROR(Name)          \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

QCAL_DEFINE_ERROR(HermiticityViolation);
QCAL_DEFINE_ERROR(DimensionError);
QCAL_DEFINE_ERROR(NormalizationError);
QCAL_DEFINE_ERROR(UnknownGate);
QCAL_DEFINE_ERROR(ActionShapeError);
QCAL_DEFINE_ERROR(ProtocolLengthError);
QCAL_DEFINE_ERROR(EmptySetError);
QCAL_DEFINE_ERROR(DegenerateStateSet);
QCAL_DEFINE_ERROR(ShapeError);
QCAL_DEFINE_ERROR(EmptyBatchError);
QCAL_DEFINE_ERROR(FidelityRangeError);
QCAL_DEFINE_ERROR(EmptyMemoryError);
QCAL_DEFINE_ERROR(StepRangeError);
QCAL_DEFINE_ERROR(ConfigError);
QCAL_DEFINE_ERROR(TaskMismatchError);
QCAL_DEFINE_ERROR(SearchSpaceError);
QCAL_DEFINE_ERROR(ParseError);

#undef QCAL_DEFINE_ERROR

}  // namespace qcal
