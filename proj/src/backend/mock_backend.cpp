#include <fstream>
#include <mutex>
#include <regex>

#include "disco/backend/backend.hpp"
#include "disco/common/paths.hpp"
#include "disco/common/random.hpp"
#include "disco/corpus/corpus.hpp"
#include "disco/errors.hpp"

namespace disco::backend {
namespace {

constexpr std::array<std::string_view, 5> kKindNames = {
    "driver_regular", "driver_concluding", "ai_regular", "ai_concluding", "scenario",
};

bool contains(std::string_view haystack, std::string_view needle) {
  return haystack.find(needle) != std::string_view::npos;
}

/// Names of the {slot} placeholders in a template.
std::vector<std::string> slot_names(const std::string& tmpl) {
  std::vector<std::string> names;
  std::size_t pos = 0;
  while ((pos = tmpl.find('{', pos)) != std::string::npos) {
    const auto close = tmpl.find('}', pos);
    if (close == std::string::npos) break;
    names.push_back(tmpl.substr(pos + 1, close - pos - 1));
    pos = close + 1;
  }
  return names;
}

std::string fill(const std::string& tmpl, const MockBank& bank, Rng& rng) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find('{', pos);
    if (open == std::string::npos) break;
    const auto close = tmpl.find('}', open);
    if (close == std::string::npos) break;
    out.append(tmpl, pos, open - pos);
    const auto& values = bank.slots.at(tmpl.substr(open + 1, close - open - 1));
    out += values[rng.uniform_index(values.size())];
    pos = close + 1;
  }
  out.append(tmpl, pos, std::string::npos);
  return out;
}

std::string all_text(const ChatRequest& request) {
  std::string s;
  for (const auto& m : request.messages) {
    s += m.content;
    s += '\n';
  }
  return s;
}

std::size_t requested_count(const std::string& prompt) {
  static const std::regex re(R"(Generate (\d+))");
  std::smatch m;
  if (std::regex_search(prompt, m, re)) {
    const auto n = std::stoul(m[1].str());
    return std::clamp<std::size_t>(n, 1, 25);
  }
  return 1;
}

std::string scenario_completion(const ChatRequest& request, const MockBank& bank, Rng& rng) {
  const std::string prompt = all_text(request);
  std::string domain;
  for (const auto d : kAllDomains) {
    if (contains(prompt, "Domain: " + std::string(display_name(d)))) {
      domain = std::string(to_string(d));
      break;
    }
  }
  if (domain.empty() || !bank.scenario_templates.contains(domain)) {
    auto it = bank.scenario_templates.begin();
    std::advance(it, static_cast<long>(rng.uniform_index(bank.scenario_templates.size())));
    domain = it->first;
  }
  const auto& templates = bank.scenario_templates.at(domain);
  const std::size_t n = requested_count(prompt);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    out += std::to_string(i + 1) + ". " + fill(templates[rng.uniform_index(templates.size())], bank, rng);
    out += '\n';
  }
  return out;
}

}  // namespace

std::string_view to_string(RequestKind k) noexcept { return kKindNames[static_cast<int>(k)]; }

RequestKind detect_request_kind(const ChatRequest& request) {
  const std::string_view system =
      request.messages.empty() ? std::string_view{} : std::string_view(request.messages.front().content);
  if (contains(system, "human driver")) {
    return contains(system, "wrap up") ? RequestKind::driver_concluding : RequestKind::driver_regular;
  }
  if (contains(system, "car AI system")) {
    return contains(system, "concludes the conversation") ? RequestKind::ai_concluding
                                                          : RequestKind::ai_regular;
  }
  if (contains(system, "scenario")) return RequestKind::scenario;
  return RequestKind::ai_regular;
}

void MockBank::validate() const {
  for (const auto kind : {RequestKind::driver_regular, RequestKind::driver_concluding,
                          RequestKind::ai_regular, RequestKind::ai_concluding}) {
    const auto it = templates.find(kind);
    if (it == templates.end() || it->second.empty()) {
      throw ValidationError("mock bank has no " + std::string(to_string(kind)) + " templates");
    }
  }
  for (const auto d : kAllDomains) {
    const auto it = scenario_templates.find(std::string(to_string(d)));
    if (it == scenario_templates.end() || it->second.empty()) {
      throw ValidationError("mock bank has no scenario templates for " + std::string(to_string(d)));
    }
  }
  const auto check = [&](const std::string& t) {
    for (const auto& name : slot_names(t)) {
      const auto it = slots.find(name);
      if (it == slots.end() || it->second.empty()) {
        throw ValidationError("mock bank template uses undefined slot {" + name + "}");
      }
    }
  };
  for (const auto& [kind, list] : templates) {
    for (const auto& t : list) check(t);
  }
  for (const auto& [domain, list] : scenario_templates) {
    for (const auto& t : list) check(t);
  }
}

MockBank load_mock_bank(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open mock bank " + path.string());
  MockBank bank;
  try {
    const Json j = Json::parse(in);
    bank.version = j.at("version").get<std::string>();
    bank.slots = j.at("slots").get<std::map<std::string, std::vector<std::string>>>();
    for (std::size_t k = 0; k < 4; ++k) {
      bank.templates[static_cast<RequestKind>(k)] = j.at(std::string(kKindNames[k])).get<std::vector<std::string>>();
    }
    bank.scenario_templates = j.at("scenarios").get<std::map<std::string, std::vector<std::string>>>();
  } catch (const Json::exception& e) {
    throw ParseError("mock bank " + path.string() + ": " + e.what());
  }
  bank.validate();
  return bank;
}

const MockBank& default_mock_bank() {
  static const MockBank bank = load_mock_bank(default_data_dir() / "mock_bank.json");
  return bank;
}

MockSelection mock_select(std::uint64_t seed, const ChatRequest& request, const MockBank& bank) {
  Rng rng(derive_seed(seed, to_json(request).dump()));
  MockSelection sel;
  sel.kind = detect_request_kind(request);
  if (sel.kind == RequestKind::scenario) {
    sel.text = scenario_completion(request, bank, rng);
  } else {
    const auto& list = bank.templates.at(sel.kind);
    sel.template_index = rng.uniform_index(list.size());
    sel.text = fill(list[sel.template_index], bank, rng);
  }
  sel.text = clean_completion(sel.text);
  return sel;
}

std::string mock_complete(std::uint64_t seed, const ChatRequest& request, const MockBank& bank) {
  return mock_select(seed, request, bank).text;
}

std::string mock_complete(std::uint64_t seed, const ChatRequest& request) {
  return mock_complete(seed, request, default_mock_bank());
}

MockBackend::MockBackend(std::uint64_t seed, std::shared_ptr<const MockBank> bank)
    : seed_(seed), bank_(std::move(bank)) {}

std::string MockBackend::complete(const ChatRequest& request) {
  request.validate();
  return mock_complete(seed_, request, bank_ ? *bank_ : default_mock_bank());
}

std::string MockBackend::id() const { return "mock:seed=" + std::to_string(seed_); }

}  // namespace disco::backend
