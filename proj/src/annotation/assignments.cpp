#include "recipemem/annotation/assignments.hpp"

#include <algorithm>
#include <random>

#include "recipemem/core/error.hpp"
#include "recipemem/core/text.hpp"

namespace recipemem::annotation {

namespace {

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

long long coverage(int g, int l, int o) {
  if (g == 1) return l;
  if (g == 2) return o + 2LL * (l - o);
  return static_cast<long long>(g) * (o / 2) + static_cast<long long>(g) * (l - o);
}

}  // namespace

void seeded_shuffle(std::vector<std::string>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(bounded(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

std::vector<Assignment> generate_assignments(const std::vector<std::string>& annotators,
                                             const std::vector<std::pair<std::string, std::vector<std::string>>>& documents,
                                             const AssignmentParams& p) {
  if (p.per_annotator < 1) throw PreconditionError("L must be positive");
  if (p.overlap < 0 || p.overlap > p.per_annotator) throw PreconditionError("O must lie in 0..L");
  if (annotators.empty()) throw PreconditionError("no annotators");

  std::vector<std::string> order = annotators;
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());
  seeded_shuffle(order, p.seed);
  std::map<std::string, long long> load;
  for (const auto& a : order) load[a] = 0;

  std::vector<Assignment> out;
  for (const auto& [recipe, docs] : documents) {
    const int nd = static_cast<int>(docs.size());
    if (p.per_annotator > nd) {
      throw PreconditionError("L=" + std::to_string(p.per_annotator) + " exceeds the " + std::to_string(nd) +
                              " documents of '" + recipe + "'");
    }
    int g = p.overlap > 0 ? 2 : 1;
    while (g <= static_cast<int>(order.size()) && coverage(g, p.per_annotator, p.overlap) < nd) ++g;
    if (g > static_cast<int>(order.size())) {
      throw PreconditionError(std::to_string(order.size()) + " annotators cannot cover the " + std::to_string(nd) +
                              " documents of '" + recipe + "' with L=" + std::to_string(p.per_annotator) +
                              ", O=" + std::to_string(p.overlap));
    }
    if (g >= 3 && p.overlap % 2 != 0) {
      throw PreconditionError("an odd O needs exactly two annotators per recipe, '" + recipe + "' needs " +
                              std::to_string(g));
    }
    const int shared_per_pair = g == 2 ? p.overlap : p.overlap / 2;
    const int pairs = g == 1 ? 0 : (g == 2 ? 1 : g);
    std::vector<int> singles(static_cast<std::size_t>(g), p.per_annotator - p.overlap);
    long long excess = coverage(g, p.per_annotator, p.overlap) - nd;
    for (int i = g - 1; excess > 0;) {
      if (std::all_of(singles.begin(), singles.end(), [](int s) { return s == 0; })) {
        throw PreconditionError("'" + recipe + "' has too few documents for " + std::to_string(g) +
                                " annotators sharing O=" + std::to_string(p.overlap));
      }
      if (singles[static_cast<std::size_t>(i)] > 0) {
        --singles[static_cast<std::size_t>(i)];
        --excess;
      }
      i = (i + g - 1) % g;
    }

    // least loaded annotators, ties in seeded order
    std::vector<std::string> chosen = order;
    std::stable_sort(chosen.begin(), chosen.end(),
                     [&](const std::string& a, const std::string& b) { return load[a] < load[b]; });
    chosen.resize(static_cast<std::size_t>(g));

    std::vector<std::string> pool = docs;
    seeded_shuffle(pool, p.seed ^ fnv1a64(recipe));
    std::size_t next = 0;
    std::vector<Assignment> group(static_cast<std::size_t>(g));
    for (int i = 0; i < g; ++i) group[static_cast<std::size_t>(i)] = {chosen[static_cast<std::size_t>(i)], recipe, {}, {}};
    for (int k = 0; k < pairs; ++k) {
      const int a = k;
      const int b = (k + 1) % g;
      for (int s = 0; s < shared_per_pair; ++s) {
        const std::string& d = pool[next++];
        group[static_cast<std::size_t>(a)].document_ids.push_back(d);
        group[static_cast<std::size_t>(b)].document_ids.push_back(d);
        group[static_cast<std::size_t>(a)].partners[d].push_back(chosen[static_cast<std::size_t>(b)]);
        group[static_cast<std::size_t>(b)].partners[d].push_back(chosen[static_cast<std::size_t>(a)]);
      }
    }
    for (int i = 0; i < g; ++i) {
      for (int s = 0; s < singles[static_cast<std::size_t>(i)]; ++s) {
        group[static_cast<std::size_t>(i)].document_ids.push_back(pool[next++]);
      }
    }
    for (auto& a : group) {
      std::sort(a.document_ids.begin(), a.document_ids.end(), [&](const std::string& x, const std::string& y) {
        return std::find(docs.begin(), docs.end(), x) < std::find(docs.begin(), docs.end(), y);
      });
      load[a.annotator] += static_cast<long long>(a.document_ids.size());
      out.push_back(std::move(a));
    }
  }
  std::sort(out.begin(), out.end(), [](const Assignment& a, const Assignment& b) {
    return std::tie(a.recipe, a.annotator) < std::tie(b.recipe, b.annotator);
  });
  return out;
}

Json assignment_to_json(const Assignment& a) {
  Json j;
  j["annotator"] = a.annotator;
  j["recipe"] = a.recipe;
  j["document_ids"] = a.document_ids;
  Json partners = Json::object();
  for (const auto& [doc, ps] : a.partners) partners[doc] = ps;
  j["partners"] = std::move(partners);
  return j;
}

Assignment assignment_from_json(const Json& j) {
  try {
    Assignment a;
    a.annotator = j.at("annotator").get<std::string>();
    a.recipe = j.at("recipe").get<std::string>();
    a.document_ids = j.at("document_ids").get<std::vector<std::string>>();
    for (const auto& [doc, ps] : j.at("partners").items()) a.partners[doc] = ps.get<std::vector<std::string>>();
    return a;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("assignment: ") + e.what());
  }
}

}  // namespace recipemem::annotation
