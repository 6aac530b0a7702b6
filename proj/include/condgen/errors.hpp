#pragma once

#include <stdexcept>
#include <string>

namespace condgen {

/// Base class for all condgen errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define CONDGEN_DEFINE_ERROR(NAME)                                 \
  class NAME : public Error {                                      \
   public:                                                         \
    explicit NAME(const std::string& what) : Error(#NAME ": " + what) {} \
  }

CONDGEN_DEFINE_ERROR(DimensionMismatch);
CONDGEN_DEFINE_ERROR(NonStationary);
CONDGEN_DEFINE_ERROR(NotPsd);
CONDGEN_DEFINE_ERROR(NonFiniteInput);
CONDGEN_DEFINE_ERROR(SingularInnovation);
CONDGEN_DEFINE_ERROR(SingularSystem);
CONDGEN_DEFINE_ERROR(TimeOutOfHorizon);
CONDGEN_DEFINE_ERROR(TimeMismatch);
CONDGEN_DEFINE_ERROR(MissingBeta);
CONDGEN_DEFINE_ERROR(MissingMarketSpec);
CONDGEN_DEFINE_ERROR(MissingJointCovariance);
CONDGEN_DEFINE_ERROR(RankDeficientDesign);
CONDGEN_DEFINE_ERROR(InsufficientData);
CONDGEN_DEFINE_ERROR(ImproperPosterior);
CONDGEN_DEFINE_ERROR(EmptySample);
CONDGEN_DEFINE_ERROR(DegenerateMarket);
CONDGEN_DEFINE_ERROR(NonPositiveInput);
CONDGEN_DEFINE_ERROR(NonPositiveMaturity);
CONDGEN_DEFINE_ERROR(ParseError);
CONDGEN_DEFINE_ERROR(SchemaMismatch);
CONDGEN_DEFINE_ERROR(ConfigError);

#undef CONDGEN_DEFINE_ERROR

}  // namespace condgen
