#pragma once

#include <ostream>

namespace hyperrate {

// Exit codes: 0 ok, 1 invalid input, 2 cap or solver failure, 3 verification failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hyperrate
