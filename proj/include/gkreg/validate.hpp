#pragma once

#include <ostream>
#include <string_view>

namespace gkreg {

// Runs the small-scale identity and equivalence checks, printing one line per
// check. `filter` keeps only checks whose tag contains it (empty keeps all).
// Returns the number of failures.
int run_validation(std::string_view filter, std::ostream& os);

}  // namespace gkreg
