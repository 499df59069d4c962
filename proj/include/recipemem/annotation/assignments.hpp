#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "recipemem/core/records.hpp"

namespace recipemem::annotation {

struct Assignment {
  std::string annotator;
  std::string recipe;
  std::vector<std::string> document_ids;                     // in the recipe's document order
  std::map<std::string, std::vector<std::string>> partners;  // document -> other annotators

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct AssignmentParams {
  int per_annotator = 9;  // L
  int overlap = 6;        // O, documents each annotator shares with others
  std::uint64_t seed = 0;
};

// Per recipe the fewest annotators g that can cover all its documents are
// chosen (least loaded first). g = 2 share O documents as one pair; g >= 3 sit
// in a ring where neighbours share O/2. The rest of each annotator's L
// documents are single, trimmed when there would be more than the recipe has.
// Ordered by (recipe, annotator). Throws PreconditionError when L > N_d,
// O > L, or the annotators cannot cover a recipe under these rules.
std::vector<Assignment> generate_assignments(const std::vector<std::string>& annotators,
                                             const std::vector<std::pair<std::string, std::vector<std::string>>>& documents,
                                             const AssignmentParams& params);

Json assignment_to_json(const Assignment& a);
Assignment assignment_from_json(const Json& j);

// Fisher-Yates with a rejection-sampled bounded draw, so the permutation is
// the same on every standard library.
void seeded_shuffle(std::vector<std::string>& items, std::uint64_t seed);

}  // namespace recipemem::annotation
