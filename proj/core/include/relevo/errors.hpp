#pragma once

#include <stdexcept>

namespace relevo {

// Base class for everything this library throws on contract violations.
// Expected outcomes (no arrival before the horizon, trigger never firing)
// are reported through optionals or partial results instead.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidIntensity : Error { using Error::Error; };
struct OutOfDomain : Error { using Error::Error; };
struct NegativeScale : Error { using Error::Error; };
struct EmptyList : Error { using Error::Error; };
struct IncompatibleIntensities : Error { using Error::Error; };
struct NegativeDuration : Error { using Error::Error; };

struct CycleDetected : Error { using Error::Error; };
struct MissingRelation : Error { using Error::Error; };
struct MissingMultiplicityData : Error { using Error::Error; };
struct UnsupportedModel : Error { using Error::Error; };
struct MissingAttributeModel : Error { using Error::Error; };
struct MissingState : Error { using Error::Error; };
struct MissingHistogram : Error { using Error::Error; };
struct MissingModel : Error { using Error::Error; };

struct NotLumpable : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct UnknownValue : Error { using Error::Error; };

struct UnorderedSchedule : Error { using Error::Error; };
struct NonpositiveRate : Error { using Error::Error; };
struct UnknownPolicy : Error { using Error::Error; };
struct EmptyTrace : Error { using Error::Error; };

struct TooFewEvents : Error { using Error::Error; };
struct EmptySample : Error { using Error::Error; };
struct NoMultiEvents : Error { using Error::Error; };
struct EmptyBlockDuration : Error { using Error::Error; };
struct EmptyTraces : Error { using Error::Error; };

struct ConfigError : Error { using Error::Error; };

}  // namespace relevo
