#include "synthaudit/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "synthaudit/error.hpp"
#include "synthaudit/rng.hpp"
#include "synthaudit/unicode.hpp"

namespace synthaudit {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string normalize_code(std::string_view raw) {
  std::string code(trim(raw));
  if (code.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "ICD code must be non-empty");
  }
  for (char& c : code) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
        c == '\v') {
      throw Error(ErrorCode::kInvalidArgument,
                  "ICD code contains whitespace: '" + std::string(raw) + "'");
    }
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return code;
}

ClinicalReport report_from_json(const json& record) {
  static const std::set<std::string> kFields = {"id", "text", "codes",
                                                "source", "generator"};
  if (!record.is_object()) {
    throw Error(ErrorCode::kFormat, "record is not an object");
  }
  for (const auto& [key, value] : record.items()) {
    if (!kFields.contains(key)) {
      throw Error(ErrorCode::kFormat, "unknown field '" + key + "'");
    }
  }
  for (const auto& key : kFields) {
    if (!record.contains(key)) {
      throw Error(ErrorCode::kFormat, "missing field '" + key + "'");
    }
  }
  if (!record["id"].is_string() || !record["text"].is_string() ||
      !record["codes"].is_array() || !record["source"].is_string()) {
    throw Error(ErrorCode::kFormat, "field has wrong type");
  }
  ClinicalReport report;
  report.id = record["id"].get<std::string>();
  report.text = record["text"].get<std::string>();
  for (const auto& code : record["codes"]) {
    if (!code.is_string()) {
      throw Error(ErrorCode::kFormat, "codes must be strings");
    }
    report.codes.emplace_back(code.get<std::string>());
  }
  report.source = parse_source(record["source"].get<std::string>());
  const auto& generator = record["generator"];
  if (generator.is_string()) {
    report.generator = generator.get<std::string>();
  } else if (!generator.is_null()) {
    throw Error(ErrorCode::kFormat, "generator must be a string or null");
  }
  if (!is_valid_utf8(report.id) || !is_valid_utf8(report.text)) {
    throw Error(ErrorCode::kFormat, "invalid UTF-8");
  }
  return report;
}

ordered_json report_to_json(const ClinicalReport& report) {
  ordered_json record;
  record["id"] = report.id;
  record["text"] = report.text;
  auto codes = ordered_json::array();
  for (const auto& code : report.codes) codes.push_back(code.code());
  record["codes"] = std::move(codes);
  record["source"] = std::string(source_name(report.source));
  record["generator"] =
      report.generator ? ordered_json(*report.generator) : ordered_json();
  return record;
}

}  // namespace

IcdCode::IcdCode(std::string_view code, std::optional<std::string> name)
    : code_(normalize_code(code)), name_(std::move(name)) {}

std::string_view source_name(Source source) {
  return source == Source::kReal ? "real" : "synthetic";
}

Source parse_source(std::string_view text) {
  if (text == "real") return Source::kReal;
  if (text == "synthetic") return Source::kSynthetic;
  throw Error(ErrorCode::kFormat,
              "source must be \"real\" or \"synthetic\", got \"" +
                  std::string(text) + "\"");
}

bool ClinicalReport::has_code(const IcdCode& code) const {
  return std::find(codes.begin(), codes.end(), code) != codes.end();
}

void validate_report(const ClinicalReport& report) {
  if (report.id.empty()) {
    throw Error(ErrorCode::kFormat, "empty id");
  }
  if (report.text.empty()) {
    throw Error(ErrorCode::kEmptyText, "empty text in report " + report.id);
  }
  if (report.codes.empty()) {
    throw Error(ErrorCode::kEmptyCodes, "empty codes in report " + report.id);
  }
  std::set<std::string> seen;
  for (const auto& code : report.codes) {
    if (!seen.insert(code.code()).second) {
      throw Error(ErrorCode::kFormat, "duplicate code " + code.code() +
                                          " in report " + report.id);
    }
  }
  if (report.source == Source::kSynthetic && !report.generator) {
    throw Error(ErrorCode::kFormat,
                "synthetic report " + report.id + " has no generator");
  }
  if (report.source == Source::kReal && report.generator) {
    throw Error(ErrorCode::kFormat,
                "real report " + report.id + " must not carry a generator");
  }
}

Corpus::Corpus(std::vector<ClinicalReport> reports)
    : reports_(std::move(reports)) {
  for (std::size_t i = 0; i < reports_.size(); ++i) {
    const auto& report = reports_[i];
    validate_report(report);
    if (!index_.emplace(report.id, i).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate id " + report.id);
    }
    for (const auto& code : report.codes) {
      by_code_[code.code()].push_back(report.id);
    }
  }
}

std::vector<IcdCode> Corpus::codes() const {
  std::vector<IcdCode> out;
  out.reserve(by_code_.size());
  for (const auto& [code, ids] : by_code_) out.emplace_back(code);
  return out;
}

const ClinicalReport* Corpus::find(std::string_view id) const {
  const auto it = index_.find(id);
  return it == index_.end() ? nullptr : &reports_[it->second];
}

const ClinicalReport& Corpus::at(std::string_view id) const {
  const auto* report = find(id);
  if (report == nullptr) {
    throw Error(ErrorCode::kNotFound, "no report with id " + std::string(id));
  }
  return *report;
}

Corpus parse_corpus(std::string_view content,
                    std::optional<Source> expected_source) {
  std::vector<ClinicalReport> reports;
  std::set<std::string, std::less<>> ids;
  std::size_t line_number = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    auto line = content.substr(start, end - start);
    start = end + 1;
    ++line_number;
    if (trim(line).empty()) continue;

    const auto where = "line " + std::to_string(line_number) + ": ";
    try {
      auto record = json::parse(line);
      auto report = report_from_json(record);
      validate_report(report);
      if (expected_source && report.source != *expected_source) {
        throw Error(ErrorCode::kSourceMismatch,
                    "expected source " +
                        std::string(source_name(*expected_source)) + ", got " +
                        std::string(source_name(report.source)));
      }
      if (!ids.insert(report.id).second) {
        throw Error(ErrorCode::kDuplicateId, "duplicate id " + report.id);
      }
      reports.push_back(std::move(report));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kFormat, where + "malformed record: " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), where + e.what());
    }
  }
  return Corpus(std::move(reports));
}

Corpus load_corpus(const std::filesystem::path& path,
                   std::optional<Source> expected_source) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open corpus " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_corpus(buffer.str(), expected_source);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& report : corpus.reports()) {
    out += report_to_json(report).dump(-1, ' ', false,
                                       ordered_json::error_handler_t::strict);
    out.push_back('\n');
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << serialize_corpus(corpus);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

CorpusStats corpus_stats(const Corpus& corpus) {
  if (corpus.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "corpus_stats on empty corpus");
  }
  CorpusStats stats;
  stats.report_count = corpus.size();
  stats.min_chars = SIZE_MAX;
  double total = 0.0;
  for (const auto& report : corpus.reports()) {
    const auto chars = count_scalars(report.text);
    total += static_cast<double>(chars);
    stats.min_chars = std::min(stats.min_chars, chars);
    stats.max_chars = std::max(stats.max_chars, chars);
    for (const auto& code : report.codes) ++stats.code_histogram[code.code()];
  }
  stats.mean_chars = total / static_cast<double>(corpus.size());
  return stats;
}

Corpus filter_by_code(const Corpus& corpus, const IcdCode& code) {
  std::vector<ClinicalReport> kept;
  for (const auto& report : corpus.reports()) {
    if (report.has_code(code)) kept.push_back(report);
  }
  return Corpus(std::move(kept));
}

std::vector<ClinicalReport> sample_examples(const Corpus& corpus,
                                            const IcdCode& code, std::size_t m,
                                            std::uint64_t seed) {
  std::vector<const ClinicalReport*> pool;
  for (const auto& report : corpus.reports()) {
    if (report.has_code(code)) pool.push_back(&report);
  }
  if (pool.empty()) {
    throw Error(ErrorCode::kNotFound, "no reports for code " + code.code());
  }
  const std::size_t take = std::min(m, pool.size());
  // Partial Fisher-Yates: the first `take` slots hold the draw.
  Rng rng(seed);
  for (std::size_t i = 0; i < take; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  std::vector<ClinicalReport> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(*pool[i]);
  return out;
}

std::map<std::string, std::string> load_code_names(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open code catalog " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::kFormat,
                path.string() + ": code catalog must be an object");
  }
  std::map<std::string, std::string> names;
  for (const auto& [code, name] : doc.items()) {
    if (!name.is_string()) {
      throw Error(ErrorCode::kFormat,
                  path.string() + ": name for " + code + " must be a string");
    }
    names[IcdCode(code).code()] = name.get<std::string>();
  }
  return names;
}

IcdCode named_code(const IcdCode& code,
                   const std::map<std::string, std::string>& names) {
  const auto it = names.find(code.code());
  if (it == names.end()) return code;
  return IcdCode(code.code(), it->second);
}

}  // namespace synthaudit
