#pragma once

#include <stdexcept>
#include <string>

namespace cdrmob {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define CDRMOB_ERROR_TYPE(Name)                                   \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& what) : Error(what) {}       \
  }

// I/O and configuration
CDRMOB_ERROR_TYPE(IoError);
CDRMOB_ERROR_TYPE(ConfigError);
CDRMOB_ERROR_TYPE(InvalidConfig);

// CDR parsing
CDRMOB_ERROR_TYPE(MalformedLine);
CDRMOB_ERROR_TYPE(UnknownActivityCode);
CDRMOB_ERROR_TYPE(UnknownTower);
CDRMOB_ERROR_TYPE(TowerOutOfRegion);
CDRMOB_ERROR_TYPE(DateOutOfWindow);

// spatial partition
CDRMOB_ERROR_TYPE(EmptyPartition);
CDRMOB_ERROR_TYPE(UnmappedTower);
CDRMOB_ERROR_TYPE(OverlappingConfig);

// statistics
CDRMOB_ERROR_TYPE(EmptyInput);
CDRMOB_ERROR_TYPE(NonPositiveSampleForLogBins);
CDRMOB_ERROR_TYPE(InsufficientSamples);
CDRMOB_ERROR_TYPE(DegenerateSamples);
CDRMOB_ERROR_TYPE(OptimizerNonConvergence);
CDRMOB_ERROR_TYPE(InvalidSupport);

// trajectories
CDRMOB_ERROR_TYPE(EmptyTrajectory);
CDRMOB_ERROR_TYPE(InsufficientPositions);
CDRMOB_ERROR_TYPE(DegenerateTensor);
CDRMOB_ERROR_TYPE(ZeroVariance);
CDRMOB_ERROR_TYPE(GroupEmpty);

#undef CDRMOB_ERROR_TYPE

}  // namespace cdrmob
