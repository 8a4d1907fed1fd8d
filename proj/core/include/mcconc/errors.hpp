#pragma once

#include <stdexcept>
#include <string>

namespace mcconc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MCCONC_DECLARE_ERROR(Name)            \
  class Name : public Error {                 \
   public:                                    \
    using Error::Error;                       \
  }

MCCONC_DECLARE_ERROR(PreconditionError);
MCCONC_DECLARE_ERROR(ConfigError);
MCCONC_DECLARE_ERROR(QuadratureFailure);
MCCONC_DECLARE_ERROR(ResidualKernelNegative);
MCCONC_DECLARE_ERROR(NoRegeneration);
MCCONC_DECLARE_ERROR(InsufficientData);
MCCONC_DECLARE_ERROR(InsufficientBlocks);
MCCONC_DECLARE_ERROR(BracketFailure);
MCCONC_DECLARE_ERROR(GammaUndefined);
MCCONC_DECLARE_ERROR(InvalidA);
MCCONC_DECLARE_ERROR(NegativeLambda);
MCCONC_DECLARE_ERROR(AllInfeasible);
MCCONC_DECLARE_ERROR(Unbounded);
MCCONC_DECLARE_ERROR(MissingInputs);

#undef MCCONC_DECLARE_ERROR

inline void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError(what);
}

}  // namespace mcconc
