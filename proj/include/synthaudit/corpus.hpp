#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace synthaudit {

// Diagnostic label. The code is trimmed and uppercased on construction; the
// optional name is the human-readable description used in prompts.
class IcdCode {
 public:
  explicit IcdCode(std::string_view code,
                   std::optional<std::string> name = std::nullopt);

  const std::string& code() const { return code_; }
  const std::optional<std::string>& name() const { return name_; }

  friend bool operator==(const IcdCode& a, const IcdCode& b) {
    return a.code_ == b.code_;
  }
  friend auto operator<=>(const IcdCode& a, const IcdCode& b) {
    return a.code_ <=> b.code_;
  }

 private:
  std::string code_;
  std::optional<std::string> name_;
};

enum class Source { kReal, kSynthetic };

std::string_view source_name(Source source);
Source parse_source(std::string_view text);

struct ClinicalReport {
  std::string id;
  std::string text;
  std::vector<IcdCode> codes;
  Source source = Source::kReal;
  std::optional<std::string> generator;

  bool has_code(const IcdCode& code) const;

  friend bool operator==(const ClinicalReport&, const ClinicalReport&) = default;
};

// Throws Error when a report breaks the record invariants (empty text or
// codes, duplicate codes, generator/source disagreement).
void validate_report(const ClinicalReport& report);

// Immutable, validated collection of reports with a code -> ids index.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<ClinicalReport> reports);

  const std::vector<ClinicalReport>& reports() const { return reports_; }
  std::size_t size() const { return reports_.size(); }
  bool empty() const { return reports_.empty(); }

  const std::map<std::string, std::vector<std::string>>& by_code() const {
    return by_code_;
  }
  // Distinct codes in ascending order.
  std::vector<IcdCode> codes() const;

  const ClinicalReport* find(std::string_view id) const;
  const ClinicalReport& at(std::string_view id) const;

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.reports_ == b.reports_;
  }

 private:
  std::vector<ClinicalReport> reports_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::map<std::string, std::vector<std::string>> by_code_;
};

struct CorpusStats {
  std::size_t report_count = 0;
  double mean_chars = 0.0;
  std::size_t min_chars = 0;
  std::size_t max_chars = 0;
  std::map<std::string, std::size_t> code_histogram;
};

Corpus load_corpus(const std::filesystem::path& path,
                   std::optional<Source> expected_source = std::nullopt);
Corpus parse_corpus(std::string_view content,
                    std::optional<Source> expected_source = std::nullopt);

void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
std::string serialize_corpus(const Corpus& corpus);

CorpusStats corpus_stats(const Corpus& corpus);

Corpus filter_by_code(const Corpus& corpus, const IcdCode& code);

// Seeded uniform draw without replacement of min(m, available) reports that
// carry `code`, in draw order. Deterministic for a fixed corpus order and seed.
std::vector<ClinicalReport> sample_examples(const Corpus& corpus,
                                            const IcdCode& code, std::size_t m,
                                            std::uint64_t seed);

// Code catalog: JSON object mapping code -> descriptive name.
std::map<std::string, std::string> load_code_names(
    const std::filesystem::path& path);
IcdCode named_code(const IcdCode& code,
                   const std::map<std::string, std::string>& names);

}  // namespace synthaudit
