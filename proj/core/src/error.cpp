#include "rsf/error.hpp"

namespace rsf {

NumericalError::NumericalError(const std::string& what, long step)
    : Error(step >= 0 ? what + " (time step " + std::to_string(step) + ")" : what), step_(step) {}

NumericalError NumericalError::annotated(const std::string& context) const {
    return NumericalError(Verbatim{}, context + ": " + what(), step_);
}

}  // namespace rsf
