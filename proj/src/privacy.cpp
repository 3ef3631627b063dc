#include "synthaudit/privacy.hpp"

#include <fmt/format.h>

#include "synthaudit/error.hpp"
#include "synthaudit/parallel.hpp"
#include "synthaudit/tsv.hpp"

namespace synthaudit {

void PrivacyConfig::validate() const {
  if (!(threshold > 0.0 && threshold < 2.0)) {
    throw Error(ErrorCode::kConfig,
                fmt::format("privacy threshold {} must lie in (0, 2)", threshold));
  }
}

NeighborMap nnd(const EmbeddingSet& synthetic, const EmbeddingSet& real,
                std::size_t threads) {
  if (synthetic.empty() || real.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "nnd needs non-empty embedding sets");
  }
  if (synthetic.dim() != real.dim()) {
    throw Error(ErrorCode::kDimMismatch,
                fmt::format("nnd: synthetic dim {} != real dim {}", synthetic.dim(),
                            real.dim()));
  }
  if (synthetic.granularity() != Granularity::kText ||
      real.granularity() != Granularity::kText) {
    throw Error(ErrorCode::kInvalidArgument, "nnd needs text-granularity sets");
  }

  const auto synthetic_ids = synthetic.ids();
  // entries() iterates in ascending id order, so keeping the first strict
  // minimum breaks ties toward the smallest id.
  std::vector<std::pair<const std::string*, const Vector*>> reals;
  for (const auto& [id, vectors] : real.entries()) reals.emplace_back(&id, &vectors.front());

  std::vector<Neighbor> found(synthetic_ids.size());
  parallel_for(synthetic_ids.size(), threads == 0 ? default_threads() : threads,
               [&](std::size_t s) {
                 const auto& query = synthetic.vector(synthetic_ids[s]);
                 const std::string* best_id = nullptr;
                 double best = 0.0;
                 for (const auto& [id, vector] : reals) {
                   const double d = cosine_distance(query, *vector);
                   if (best_id == nullptr || d < best) {
                     best = d;
                     best_id = id;
                   }
                 }
                 found[s] = {*best_id, best};
               });

  NeighborMap out;
  for (std::size_t s = 0; s < synthetic_ids.size(); ++s) {
    out.emplace(synthetic_ids[s], std::move(found[s]));
  }
  return out;
}

PrivacyScores privacy_scores(const NeighborMap& neighbors,
                             const PrivacyConfig& config) {
  config.validate();
  if (neighbors.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "privacy_scores needs a non-empty map");
  }
  PrivacyScores scores;
  double total = 0.0;
  for (const auto& [synthetic_id, neighbor] : neighbors) {
    total += neighbor.distance;
    if (neighbor.distance < config.threshold) {
      scores.flagged.push_back({synthetic_id, neighbor.real_id, neighbor.distance});
    }
  }
  const auto count = static_cast<double>(neighbors.size());
  scores.mean_nnd = total / count;
  scores.plagiarism_rate = static_cast<double>(scores.flagged.size()) / count;
  return scores;
}

std::string audit_tsv(const PrivacyScores& scores, const Corpus& synthetic,
                      const Corpus& real) {
  std::string out = "synthetic_id\treal_id\tdistance\tsynthetic_text\treal_text\n";
  for (const auto& pair : scores.flagged) {
    const auto* s = synthetic.find(pair.synthetic_id);
    const auto* r = real.find(pair.real_id);
    out += tsv::join_row({pair.synthetic_id, pair.real_id,
                          fmt::format("{:.17g}", pair.distance),
                          s != nullptr ? s->text : std::string(),
                          r != nullptr ? r->text : std::string()});
    out.push_back('\n');
  }
  return out;
}

}  // namespace synthaudit
