#pragma once

#include <string>
#include <vector>

#include "circsim/config.hpp"

namespace circsim::cli {

// Named, fully specified runs shipping with the tool, one per reproduced
// dataset. Building a recipe is deterministic; the same JSON lives in the
// recipes/ directory for reference and for running with `run`.
const std::vector<std::string>& recipe_names();

// Throws ConfigError listing the valid names when unknown.
RunConfig build_recipe(const std::string& name);

}  // namespace circsim::cli
