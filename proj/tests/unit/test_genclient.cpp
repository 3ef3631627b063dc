#include <doctest.h>

#include <atomic>
#include <set>

#include "fixtures.hpp"
#include "json_fuzz.hpp"
#include "mock_servers.hpp"
#include "synthaudit/error.hpp"
#include "synthaudit/genclient.hpp"

using namespace synthaudit;
using testing::MockLlmOptions;
using testing::MockLlmServer;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

GenerationConfig config_for(const std::string& base_url, std::size_t n = 10) {
  GenerationConfig config;
  config.base_url = base_url;
  config.model = "mock-model";
  config.m = 10;
  config.n = n;
  config.seed = 11;
  return config;
}

// In-process transport answering like the mock server.
ChatTransport scripted(MockLlmOptions options, std::atomic<std::size_t>* calls = nullptr) {
  auto counters = std::make_shared<std::map<std::string, std::size_t>>();
  auto mutex = std::make_shared<std::mutex>();
  return [options, counters, mutex, calls](const GenerationConfig&, const PromptBundle& bundle) {
    std::size_t attempt = 0;
    {
      std::lock_guard lock(*mutex);
      attempt = (*counters)[bundle.code.code()]++;
    }
    if (calls != nullptr) ++*calls;
    return MockLlmServer::respond(bundle.user, options, attempt);
  };
}

}  // namespace

TEST_CASE("extract json block") {
  CHECK(extract_json_block("Claro! {\"a\": 1} espero que sirva") == "{\"a\": 1}");
  const std::string braced = "{\"t\": \"llave } en texto\"}";
  CHECK(extract_json_block(braced) == braced);
  CHECK(extract_json_block("x {\"a\": {\"b\": \"\\\"}\"}} y {\"c\": 2}") ==
        "{\"a\": {\"b\": \"\\\"}\"}}");
  try {
    extract_json_block("sin json aqui");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kExtraction);
    CHECK(std::string(e.what()) == "no opening brace");
  }
  CHECK(message_of([] { extract_json_block("{\"a\": {\"b\": 1}"); }) == "unbalanced braces");
}

TEST_CASE("extraction fuzz: round trip and idempotence") {
  Rng rng(2024);
  for (int i = 0; i < 200; ++i) {
    const auto object = testing::fuzz_object(rng, 3);
    const auto text = object.dump(rng.below(2) == 0 ? -1 : 2);
    const auto raw = testing::fuzz_chatter(rng) + text + testing::fuzz_chatter(rng);
    const auto block = extract_json_block(raw);
    REQUIRE(block == text);
    CHECK(extract_json_block(block) == block);
    CHECK(nlohmann::ordered_json::parse(block) == object);
  }
}

TEST_CASE("parse generation shapes") {
  const IcdCode f32("F32");
  const auto a = parse_generation(R"({"caso 1": {"[F32]": "Episodio depresivo leve"}})", f32, "m");
  REQUIRE(a.size() == 1);
  CHECK(a[0].codes == std::vector<IcdCode>{f32});
  CHECK(a[0].text == "Episodio depresivo leve");
  CHECK(a[0].source == Source::kSynthetic);
  CHECK(a[0].generator == std::optional<std::string>("m"));

  const auto b = parse_generation(R"({"diagnosticos": ["A", "B"]})", f32, "m");
  REQUIRE(b.size() == 2);
  CHECK(b[0].text == "A");
  CHECK(b[1].text == "B");
  CHECK(b[0].id != b[1].id);

  CHECK(message_of([&] { parse_generation(R"({"caso 1": {}})", f32, "m"); }) == "zero diagnoses");
  CHECK(code_of([&] { parse_generation(R"({"caso 1": {"[F32]": "  "}})", f32, "m"); }) ==
        ErrorCode::kParse);
  CHECK(code_of([&] { parse_generation("[1, 2]", f32, "m"); }) == ErrorCode::kParse);
  CHECK(code_of([&] { parse_generation("{oops", f32, "m"); }) == ErrorCode::kParse);
}

TEST_CASE("report ids are content addressed") {
  const IcdCode f32("F32");
  const auto first = parse_generation(R"({"diagnosticos": ["A"]})", f32, "m");
  const auto again = parse_generation(R"({"diagnosticos": ["A"]})", f32, "m");
  const auto other_model = parse_generation(R"({"diagnosticos": ["A"]})", f32, "n");
  CHECK(first[0].id == again[0].id);
  CHECK(first[0].id != other_model[0].id);
  CHECK(first[0].id == synthetic_report_id("m", f32, 1, "A"));
  CHECK(first[0].id.rfind("syn-", 0) == 0);
}

TEST_CASE("chat request and response wire format") {
  auto config = config_for("http://x");
  PromptBundle bundle{"sys", "usr", IcdCode("F32"), 10};
  auto body = nlohmann::json::parse(chat_request_body(config, bundle));
  CHECK(body["model"] == "mock-model");
  CHECK(body["stream"] == false);
  CHECK(body["messages"][0]["role"] == "system");
  CHECK(body["messages"][0]["content"] == "sys");
  CHECK(body["messages"][1]["role"] == "user");
  CHECK_FALSE(body.contains("options"));
  config.options = {{"temperature", 0.7}};
  body = nlohmann::json::parse(chat_request_body(config, bundle));
  CHECK(body["options"]["temperature"] == 0.7);

  CHECK(parse_chat_response(R"({"message": {"role": "assistant", "content": "hola"}})") == "hola");
  CHECK(code_of([] { parse_chat_response(R"({"choices": []})"); }) == ErrorCode::kEndpoint);
  CHECK(code_of([] { parse_chat_response("not json"); }) == ErrorCode::kEndpoint);
}

TEST_CASE("generate for code over http") {
  MockLlmServer server;
  auto fixture = testing::make_fixture(2, 12);
  const IcdCode code("X00", fixture.code_names.at("X00"));
  const auto result = generate_for_code(config_for(server.base_url()),
                                        PromptTemplateSet::defaults(), fixture.corpus, code);
  CHECK(result.reports.size() == 10);
  CHECK(result.attempts.size() == 1);
  CHECK(server.request_count() == 1);
  CHECK(server.last_model() == "mock-model");
  for (const auto& report : result.reports) {
    CHECK_NOTHROW(validate_report(report));
    CHECK(report.codes == std::vector<IcdCode>{IcdCode("X00")});
  }
  REQUIRE(result.attempts[0].extracted_json.has_value());
  CHECK(result.attempts[0].extracted_json->front() == '{');
  CHECK(result.attempts[0].extracted_json->back() == '}');
}

TEST_CASE("retries reuse the same prompt") {
  auto fixture = testing::make_fixture(1, 12);
  const IcdCode code("X00", fixture.code_names.at("X00"));
  auto config = config_for("http://unused");
  config.max_retries = 3;
  std::vector<std::string> prompts;
  MockLlmOptions options;
  options.failures_per_code = 2;
  auto inner = scripted(options);
  const ChatTransport recording = [&](const GenerationConfig& c, const PromptBundle& b) {
    prompts.push_back(b.user);
    return inner(c, b);
  };
  const auto result =
      generate_for_code(config, PromptTemplateSet::defaults(), fixture.corpus, code, recording);
  CHECK(result.attempts.size() == 3);
  CHECK(result.reports.size() == 10);
  REQUIRE(prompts.size() == 3);
  CHECK(prompts[0] == prompts[1]);
  CHECK(prompts[1] == prompts[2]);
}

TEST_CASE("always garbage fails after max_retries + 1 attempts") {
  auto fixture = testing::make_fixture(1, 12);
  const IcdCode code("X00", fixture.code_names.at("X00"));
  auto config = config_for("http://unused");
  config.max_retries = 2;
  MockLlmOptions options;
  options.broken_codes = {"X00"};
  std::atomic<std::size_t> calls{0};
  CHECK_THROWS_AS(generate_for_code(config, PromptTemplateSet::defaults(), fixture.corpus, code,
                                    scripted(options, &calls)),
                  Error);
  CHECK(calls == 3);
}

TEST_CASE("partial and oversized yields") {
  auto fixture = testing::make_fixture(1, 12);
  const IcdCode code("X00", fixture.code_names.at("X00"));
  auto config = config_for("http://unused");
  MockLlmOptions partial;
  partial.override_count = 7;
  CHECK(generate_for_code(config, PromptTemplateSet::defaults(), fixture.corpus, code,
                          scripted(partial))
            .reports.size() == 7);
  MockLlmOptions oversized;
  oversized.override_count = 14;
  CHECK(generate_for_code(config, PromptTemplateSet::defaults(), fixture.corpus, code,
                          scripted(oversized))
            .reports.size() == 10);
}

TEST_CASE("unreachable endpoint") {
  auto fixture = testing::make_fixture(1, 3);
  const IcdCode code("X00", fixture.code_names.at("X00"));
  auto config = config_for("http://127.0.0.1:1");
  config.max_retries = 0;
  config.request_timeout = 2;
  CHECK(code_of([&] {
          generate_for_code(config, PromptTemplateSet::defaults(), fixture.corpus, code);
        }) == ErrorCode::kEndpoint);
}

TEST_CASE("pipeline over all codes") {
  MockLlmServer server;
  const auto fixture = testing::make_fixture(5, 6);
  auto config = config_for(server.base_url(), 4);
  config.parallelism = 3;
  const auto result = run_pipeline(config, PromptTemplateSet::defaults(), fixture.corpus,
                                    fixture.code_names);
  CHECK(result.synthetic.size() == 20);
  CHECK(result.yields.size() == 5);
  for (const auto& [code, yield] : result.yields) {
    CHECK(yield.requested == 4);
    CHECK(yield.produced == 4);
    CHECK(yield.attempts == 1);
    CHECK_FALSE(yield.failure.has_value());
  }
  // Output is ordered by code and then ordinal.
  std::vector<std::string> codes;
  for (const auto& report : result.synthetic.reports()) {
    CHECK(report.source == Source::kSynthetic);
    CHECK(report.generator == std::optional<std::string>("mock-model"));
    CHECK(report.codes.size() == 1);
    codes.push_back(report.codes[0].code());
  }
  CHECK(std::is_sorted(codes.begin(), codes.end()));

  const auto again = run_pipeline(config, PromptTemplateSet::defaults(), fixture.corpus,
                                  fixture.code_names);
  CHECK(serialize_corpus(again.synthetic) == serialize_corpus(result.synthetic));
}

TEST_CASE("pipeline skips failing codes") {
  const auto fixture = testing::make_fixture(2, 6);
  auto config = config_for("http://unused", 3);
  config.max_retries = 1;
  MockLlmOptions options;
  options.broken_codes = {"X01"};
  const auto result = run_pipeline(config, PromptTemplateSet::defaults(), fixture.corpus,
                                   fixture.code_names, scripted(options));
  CHECK(result.synthetic.size() == 3);
  REQUIRE(result.yields.at("X01").failure.has_value());
  CHECK(result.yields.at("X01").produced == 0);
  CHECK(result.yields.at("X01").attempts == 2);
  CHECK(result.yields.at("X00").produced == 3);

  options.broken_codes = {"X00", "X01"};
  CHECK_THROWS_AS(run_pipeline(config, PromptTemplateSet::defaults(), fixture.corpus,
                               fixture.code_names, scripted(options)),
                  Error);
  CHECK(code_of([&] {
          run_pipeline(config, PromptTemplateSet::defaults(), Corpus{}, fixture.code_names);
        }) == ErrorCode::kEmptyCorpus);
}

TEST_CASE("codes without a catalog name are skipped") {
  const auto fixture = testing::make_fixture(2, 4);
  auto names = fixture.code_names;
  names.erase("X01");
  auto config = config_for("http://unused", 2);
  const auto result = run_pipeline(config, PromptTemplateSet::defaults(), fixture.corpus, names,
                                   scripted({}));
  CHECK(result.synthetic.size() == 2);
  CHECK(result.yields.at("X01").failure.has_value());
}

TEST_CASE("yield log round trip") {
  std::map<std::string, CodeYield> yields{{"A", {10, 7, 2, std::nullopt}},
                                          {"B", {10, 0, 4, std::string("boom")}}};
  const auto back = yields_from_json(nlohmann::json::parse(yields_to_json(yields).dump()));
  CHECK(back.at("A").produced == 7);
  CHECK(back.at("B").failure == std::optional<std::string>("boom"));
  CHECK(back.at("B").attempts == 4);
}

TEST_CASE("generation config validation") {
  GenerationConfig config;
  CHECK_THROWS_AS(config.validate(), Error);
  config.model = "m";
  CHECK_NOTHROW(config.validate());
  config.n = 0;
  CHECK_THROWS_AS(config.validate(), Error);
  config.n = 1;
  config.parallelism = 0;
  CHECK_THROWS_AS(config.validate(), Error);
}
