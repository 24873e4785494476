#include "tcl/errors.hpp"

namespace tcl {

EngineError::~EngineError() = default;

}  // namespace tcl
