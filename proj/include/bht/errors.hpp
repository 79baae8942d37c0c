#pragma once

#include <stdexcept>
#include <string>

namespace bht {

#define BHT_ERROR(Name)                                                        \
   struct Name : std::runtime_error {                                          \
      explicit Name(const std::string &what) : std::runtime_error(what) {}     \
   };

BHT_ERROR(RangeError)
BHT_ERROR(MonotonicityError)
BHT_ERROR(DomainError)
BHT_ERROR(DegenerateError)
BHT_ERROR(NotStationary)
BHT_ERROR(NoStationaryPoint)
BHT_ERROR(PreconditionError)
BHT_ERROR(AliasingError)
BHT_ERROR(FrameError)
BHT_ERROR(RegimeMismatch)
BHT_ERROR(InsufficientSamples)
BHT_ERROR(MixedDerivativeTooSmall)
BHT_ERROR(IndexError)
BHT_ERROR(InsufficientPoints)
BHT_ERROR(ConfigError)

#undef BHT_ERROR

} // namespace bht
