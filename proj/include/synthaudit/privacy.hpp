#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "synthaudit/corpus.hpp"
#include "synthaudit/embed.hpp"

namespace synthaudit {

struct PrivacyConfig {
  double threshold = 0.05;

  void validate() const;
};

struct Neighbor {
  std::string real_id;
  double distance = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct FlaggedPair {
  std::string synthetic_id;
  std::string real_id;
  double distance = 0.0;
};

struct PrivacyScores {
  double mean_nnd = 0.0;
  double plagiarism_rate = 0.0;
  std::vector<FlaggedPair> flagged;
};

using NeighborMap = std::map<std::string, Neighbor>;

// Exact nearest real neighbor of every synthetic vector under cosine
// distance; ties go to the smallest real id.
NeighborMap nnd(const EmbeddingSet& synthetic, const EmbeddingSet& real,
                std::size_t threads = 0);

// Flags entries with distance strictly below the threshold.
PrivacyScores privacy_scores(const NeighborMap& neighbors,
                             const PrivacyConfig& config);

// TSV audit of flagged pairs with both texts side by side.
std::string audit_tsv(const PrivacyScores& scores, const Corpus& synthetic,
                      const Corpus& real);

}  // namespace synthaudit
