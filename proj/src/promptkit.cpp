#include "synthaudit/promptkit.hpp"

#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "synthaudit/error.hpp"

namespace synthaudit {
namespace {

constexpr const char* kSystemPrompt =
    "Eres un asistente medico especializado en generar diagnosticos clinicos "
    "breves en espanol.\n"
    "Devuelve unicamente un JSON **valido y cerrado correctamente** (todas las "
    "llaves deben estar balanceadas).\n"
    "No incluyas comillas triples ni texto adicional.\n"
    "\n"
    "El JSON debe tener esta estructura exacta: \n"
    "{\n"
    "    \"diagnosticos\": [\"Diagnostico A\", \"Diagnostico B\", ...]\n"
    "}";

constexpr const char* kStartPrompt =
    "A continuacion tienes informacion sobre una etiqueta CIE-10 y ejemplos "
    "de diagnosticos asociados:";

constexpr const char* kExamplePrompt =
    "- Codigos CIE-10 asociados al ejemplo: {code}\n"
    "- Nombre de la etiqueta: {code_name}\n"
    "- Diagnostico de ejemplo: {example}";

constexpr const char* kEndPrompt =
    "Tu tarea es generar exactamente {n} diagnosticos clinicos nuevos, "
    "distintos de los anteriores, que correspondan a la etiqueta "
    "{code}-{code_name}.\n"
    "\n"
    "Devuelve la respuesta como un JSON con esta estructura exacta:\n"
    "\n"
    "{\n"
    "  \"caso 1\": {\n"
    "      \"[lista_codigos]\":\"Diagnostico 1\"\n"
    "  },\n"
    "  \"caso 2\": {\n"
    "      \"[lista_codigos]\":\"Diagnostico 2\"\n"
    "  },\n"
    "  ...\n"
    "}\n"
    "\n"
    "Debe ser JSON valido, sin ningun texto adicional.";

constexpr const char* kSegmentSeparator = "\n\n";

bool is_placeholder_char(char c) {
  return (c >= 'a' && c <= 'z') || c == '_';
}

// Calls `on_placeholder(name)` for each "{identifier}" and `on_text(chunk)`
// for everything in between, in order.
template <typename OnText, typename OnPlaceholder>
void scan_template(std::string_view tpl, OnText on_text,
                   OnPlaceholder on_placeholder) {
  std::size_t literal_start = 0;
  std::size_t i = 0;
  while (i < tpl.size()) {
    if (tpl[i] == '{') {
      std::size_t j = i + 1;
      while (j < tpl.size() && is_placeholder_char(tpl[j])) ++j;
      if (j > i + 1 && j < tpl.size() && tpl[j] == '}') {
        on_text(tpl.substr(literal_start, i - literal_start));
        on_placeholder(tpl.substr(i + 1, j - i - 1));
        i = j + 1;
        literal_start = i;
        continue;
      }
    }
    ++i;
  }
  on_text(tpl.substr(literal_start));
}

std::string substitute(std::string_view tpl,
                       const std::map<std::string, std::string, std::less<>>& values) {
  std::string out;
  scan_template(
      tpl, [&](std::string_view text) { out += text; },
      [&](std::string_view name) {
        const auto it = values.find(name);
        if (it == values.end()) {
          throw Error(ErrorCode::kInvalidArgument,
                      "unresolved placeholder {" + std::string(name) + "}");
        }
        out += it->second;
      });
  return out;
}

void check_placeholders(std::string_view segment, std::string_view tpl,
                        const std::set<std::string, std::less<>>& allowed) {
  scan_template(
      tpl, [](std::string_view) {},
      [&](std::string_view name) {
        if (!allowed.contains(name)) {
          throw Error(ErrorCode::kConfig,
                      std::string(segment) + " uses unknown placeholder {" +
                          std::string(name) + "}");
        }
      });
}

std::string join_codes(const std::vector<IcdCode>& codes) {
  std::string out;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (i > 0) out += ", ";
    out += codes[i].code();
  }
  return out;
}

}  // namespace

PromptTemplateSet PromptTemplateSet::defaults() {
  return {kSystemPrompt, kStartPrompt, kExamplePrompt, kEndPrompt};
}

void PromptTemplateSet::validate() const {
  check_placeholders("system_prompt", system_prompt, {});
  check_placeholders("start_prompt", start_prompt, {});
  check_placeholders("example_prompt", example_prompt,
                     {"code", "code_name", "example"});
  check_placeholders("end_prompt", end_prompt, {"n", "code", "code_name"});
}

PromptTemplateSet load_templates(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open templates " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::kFormat, path.string() + ": expected an object");
  }
  auto templates = PromptTemplateSet::defaults();
  const std::pair<const char*, std::string*> fields[] = {
      {"system_prompt", &templates.system_prompt},
      {"start_prompt", &templates.start_prompt},
      {"example_prompt", &templates.example_prompt},
      {"end_prompt", &templates.end_prompt},
  };
  for (const auto& [key, target] : fields) {
    if (!doc.contains(key)) continue;
    if (!doc[key].is_string()) {
      throw Error(ErrorCode::kFormat,
                  path.string() + ": " + key + " must be a string");
    }
    *target = doc[key].get<std::string>();
  }
  templates.validate();
  return templates;
}

std::string render_system_prompt(const PromptTemplateSet& templates) {
  return templates.system_prompt;
}

std::string render_user_prompt(const PromptTemplateSet& templates,
                               const IcdCode& code,
                               std::span<const ClinicalReport> examples,
                               std::size_t n) {
  if (examples.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no few-shot examples");
  }
  if (n == 0) {
    throw Error(ErrorCode::kInvalidArgument, "generation count must be >= 1");
  }
  if (!code.name()) {
    throw Error(ErrorCode::kInvalidArgument,
                "missing code name for " + code.code());
  }
  templates.validate();

  std::string user = substitute(templates.start_prompt, {});
  for (const auto& example : examples) {
    user += kSegmentSeparator;
    user += substitute(templates.example_prompt,
                       {{"code", join_codes(example.codes)},
                        {"code_name", *code.name()},
                        {"example", example.text}});
  }
  user += kSegmentSeparator;
  user += substitute(templates.end_prompt, {{"n", std::to_string(n)},
                                            {"code", code.code()},
                                            {"code_name", *code.name()}});
  return user;
}

PromptBundle build_prompt(const PromptTemplateSet& templates,
                          const Corpus& corpus, const IcdCode& code,
                          std::size_t m, std::size_t n, std::uint64_t seed) {
  const auto examples = sample_examples(corpus, code, m, seed);
  return PromptBundle{render_system_prompt(templates),
                      render_user_prompt(templates, code, examples, n), code,
                      n};
}

}  // namespace synthaudit
