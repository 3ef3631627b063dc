#include "fixtures.hpp"

#include <vector>

#include <fmt/format.h>

namespace synthaudit::testing {

SyntheticFixture make_fixture(std::size_t codes, std::size_t per_code) {
  static const char* kNouns[] = {"puerta", "jardin", "ventana", "camino", "lampara",
                                 "puente", "tejado", "reloj",   "barco",  "libro"};
  SyntheticFixture fixture;
  std::vector<ClinicalReport> reports;
  for (std::size_t c = 0; c < codes; ++c) {
    const auto code = fmt::format("X{:02d}", c);
    fixture.code_names[code] = fmt::format("Etiqueta de prueba {}", c);
    for (std::size_t i = 0; i < per_code; ++i) {
      ClinicalReport report;
      report.id = fmt::format("real-{}-{:02d}", code, i);
      report.text = fmt::format("Relleno {} del grupo {}. Una {} y otra {} en la escena {}.", i,
                                code, kNouns[(c + i) % 10], kNouns[(c * 3 + i * 7) % 10], i + c);
      report.codes = {IcdCode(code)};
      report.source = Source::kReal;
      reports.push_back(std::move(report));
    }
  }
  fixture.corpus = Corpus(std::move(reports));
  return fixture;
}

std::filesystem::path source_dir() { return SYNTHAUDIT_SOURCE_DIR; }
std::filesystem::path fixture_dir() { return source_dir() / "fixtures"; }
std::filesystem::path toy_real_path() { return fixture_dir() / "toy_real.jsonl"; }
std::filesystem::path toy_code_names_path() { return fixture_dir() / "toy_code_names.json"; }

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("synthaudit-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace synthaudit::testing
