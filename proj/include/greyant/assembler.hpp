#pragma once

#include <string_view>

#include "greyant/mcb.hpp"

namespace greyant {

// Parses the line-oriented assembly grammar into a validated module.
// Throws AsmError (with line number) on syntax/resolution problems and
// ValidationError when the assembled module breaks a module invariant.
ContractModule assemble(std::string_view text);

}  // namespace greyant
