#pragma once
#include <stdexcept>
#include <string>

namespace tcl {

// Base class for every failure the engine can signal. `kind()` is the stable
// machine-readable tag used in CLI error reporting and exit-code mapping.
class EngineError : public std::runtime_error {
 public:
  EngineError(std::string kind, const std::string& msg)
      : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}
  ~EngineError() override;  // key function, defined out of line
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define TCL_DEFINE_ERROR(NAME, TAG)                         \
  class NAME : public EngineError {                          \
   public:                                                   \
    explicit NAME(const std::string& msg)                    \
        : EngineError(TAG, msg) {}                           \
  }

// A law with an atom (point mass) was asked for a density.
TCL_DEFINE_ERROR(AtomicLawError, "AtomicLaw");
// An argument left the mathematical domain of the operation.
TCL_DEFINE_ERROR(DomainError, "DomainError");
// Quadrature truncation/refinement failed to reach tolerance.
TCL_DEFINE_ERROR(QuadratureError, "QuadratureError");
// The requested computation needs model structure this model lacks.
TCL_DEFINE_ERROR(UnsupportedModelError, "UnsupportedModel");
// Linear algebra / ODE stepping broke down (pivot, step underflow, ...).
TCL_DEFINE_ERROR(NumericsError, "NumericsError");
// A conserved quantity (probability mass) drifted beyond tolerance.
TCL_DEFINE_ERROR(ConservationError, "ConservationError");
// An explicit scheme was run outside its stability region.
TCL_DEFINE_ERROR(StabilityError, "StabilityError");
// Fourier inversion produced structure inconsistent with a density.
TCL_DEFINE_ERROR(InversionError, "InversionError");
// A parameter choice degenerates the model (e.g. zero diffusion loading).
TCL_DEFINE_ERROR(DegenerateModelError, "DegenerateModel");
// The subordinator specification cannot support the operation.
TCL_DEFINE_ERROR(UnsupportedSpecError, "UnsupportedSpec");
// Configuration file / parameter validation failure.
TCL_DEFINE_ERROR(ConfigError, "ConfigError");

#undef TCL_DEFINE_ERROR

}  // namespace tcl
