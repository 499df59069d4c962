#pragma once

#include <optional>
#include <string>
#include <vector>

#include "recipemem/core/types.hpp"

namespace recipemem {

struct Violation {
  std::string code;     // e.g. "duplicate_ingredient_ordinal"
  std::string message;  // human readable, names the offending ordinal
  std::optional<int> ordinal;
};

// Empty iff every GeneratedRecipe invariant holds. Violations are data, not errors.
std::vector<Violation> validate_recipe(const GeneratedRecipe& recipe);

}  // namespace recipemem
