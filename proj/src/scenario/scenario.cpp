#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "disco/common/paths.hpp"
#include "disco/common/random.hpp"
#include "disco/common/text.hpp"
#include "disco/errors.hpp"
#include "disco/scenario/scenario.hpp"

namespace disco::scenario {
namespace {

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

/// Returns the item text when `line` starts a numbered item, else empty.
std::string_view numbered_item(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i == 0 || i >= line.size() || (line[i] != '.' && line[i] != ')')) return {};
  return text::trim(line.substr(i + 1));
}

std::string_view bullet_item(std::string_view line) {
  for (const std::string_view b : {"- ", "* ", "\xE2\x80\xA2 "}) {
    if (line.substr(0, b.size()) == b) return text::trim(line.substr(b.size()));
  }
  return {};
}

/// Strips a wrapping pair of quotes or bold markers some models add.
std::string_view unwrap(std::string_view s) {
  for (const std::string_view q : {"\"", "**"}) {
    if (s.size() > 2 * q.size() && s.substr(0, q.size()) == q && s.substr(s.size() - q.size()) == q) {
      s = text::trim(s.substr(q.size(), s.size() - 2 * q.size()));
    }
  }
  return s;
}

std::set<std::string> key_tokens(std::string_view text) {
  std::set<std::string> out;
  std::istringstream in(dedup_key(text));
  std::string w;
  while (in >> w) out.insert(w);
  return out;
}

}  // namespace

FewShotBank::FewShotBank(DomainTag domain, std::vector<std::string> examples)
    : domain_(domain), examples_(std::move(examples)) {
  if (examples_.size() < 10 || examples_.size() > 20) {
    throw ValidationError("few-shot bank for " + std::string(to_string(domain)) + " has " +
                          std::to_string(examples_.size()) + " examples; 10 to 20 are required");
  }
  std::set<std::string> seen;
  for (const auto& e : examples_) {
    if (text::is_blank(e)) throw ValidationError("few-shot bank contains an empty example");
    if (!seen.insert(e).second) throw ValidationError("few-shot bank repeats example \"" + e + "\"");
  }
}

FewShotBank load_fewshot_bank(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw NotFoundError("cannot open few-shot bank " + file.string());
  try {
    const Json j = Json::parse(in);
    return FewShotBank(parse_domain(j.at("domain").get<std::string>()),
                       j.at("examples").get<std::vector<std::string>>());
  } catch (const Json::exception& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

FewShotBank load_fewshot_bank(const std::filesystem::path& dir, DomainTag domain) {
  auto bank = load_fewshot_bank(dir / (std::string(to_string(domain)) + ".json"));
  if (bank.domain() != domain) {
    throw ValidationError("few-shot bank in " + dir.string() + " is labelled " +
                          std::string(to_string(bank.domain())));
  }
  return bank;
}

std::string load_scenario_template(const std::filesystem::path& prompts_dir) {
  const auto path = prompts_dir / "scenario.txt";
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

backend::ChatRequest build_scenario_prompt(const FewShotBank& bank, int batch_size,
                                           std::string_view system_template) {
  if (batch_size < 1 || batch_size > kMaxBatchSize) {
    throw ArgumentError("batch_size must lie in [1, " + std::to_string(kMaxBatchSize) + "], got " +
                        std::to_string(batch_size));
  }
  std::string examples;
  for (std::size_t i = 0; i < bank.examples().size(); ++i) {
    examples += std::to_string(i + 1) + ". " + bank.examples()[i] + "\n";
  }
  std::string system(system_template);
  system = replace_all(system, "{domain}", display_name(bank.domain()));
  system = replace_all(system, "{count}", std::to_string(batch_size));
  system = replace_all(system, "{examples}", examples);

  backend::ChatRequest r;
  r.messages.push_back({backend::Role::system, std::string(text::trim(system))});
  r.messages.push_back({backend::Role::user, "Generate " + std::to_string(batch_size) + " scenarios for the " +
                                                 std::string(display_name(bank.domain())) + " domain."});
  return r;
}

backend::ChatRequest build_scenario_prompt(const FewShotBank& bank, int batch_size) {
  static const std::string tmpl = load_scenario_template(default_data_dir() / "prompts");
  return build_scenario_prompt(bank, batch_size, tmpl);
}

std::string scenario_id(DomainTag domain, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", index);
  return std::string(to_string(domain)) + "-" + buf;
}

std::vector<Scenario> parse_scenarios(std::string_view completion, DomainTag domain, std::size_t first_index) {
  std::vector<std::string> lines;
  {
    std::istringstream in{std::string(completion)};
    std::string line;
    while (std::getline(in, line)) lines.emplace_back(text::trim(line));
  }
  std::vector<std::string> items;
  bool numbered = false;
  for (const auto& line : lines) {
    const auto item = numbered_item(line);
    if (!item.empty()) {
      numbered = true;
      items.emplace_back(unwrap(item));
    }
  }
  if (!numbered) {
    for (const auto& line : lines) {
      const auto item = bullet_item(line);
      if (!item.empty()) items.emplace_back(unwrap(item));
    }
  }
  if (items.empty()) {
    // A single unnumbered scenario.
    const auto whole = text::trim(completion);
    if (!whole.empty() && std::count(whole.begin(), whole.end(), '\n') == 0) items.emplace_back(unwrap(whole));
  }
  std::vector<Scenario> out;
  for (auto& item : items) {
    if (text::is_blank(item)) continue;
    Scenario s;
    s.domain = domain;
    s.text = std::move(item);
    s.id = scenario_id(domain, first_index + out.size() + 1);
    out.push_back(std::move(s));
  }
  if (out.empty()) {
    throw ParseError("no scenarios found in completion: " + std::string(completion.substr(0, 500)));
  }
  return out;
}

std::string dedup_key(std::string_view text) {
  std::string out;
  bool space = false;
  for (const char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || u >= 0x80) {
      if (space && !out.empty()) out += ' ';
      space = false;
      out += static_cast<char>(std::tolower(u));
    } else if (c == '\'') {
      // keep contractions together
    } else {
      space = true;
    }
  }
  return out;
}

double jaccard(std::string_view a, std::string_view b) {
  const auto ta = key_tokens(a);
  const auto tb = key_tokens(b);
  if (ta.empty() && tb.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& t : ta) common += tb.count(t);
  return static_cast<double>(common) / static_cast<double>(ta.size() + tb.size() - common);
}

bool is_duplicate(std::string_view a, std::string_view b) {
  return dedup_key(a) == dedup_key(b) || jaccard(a, b) > 0.8;
}

std::vector<Scenario> generate_scenarios(backend::Backend& backend, const FewShotBank& bank,
                                         std::size_t target_count, std::uint64_t seed,
                                         const ScenarioGenOptions& options) {
  std::vector<Scenario> out;
  if (target_count == 0) return out;
  const std::size_t budget = 10 * target_count;
  std::size_t candidates = 0;
  for (std::uint64_t batch = 0; out.size() < target_count; ++batch) {
    if (candidates >= budget) {
      throw InsufficientDiversityError(
          "only " + std::to_string(out.size()) + " unique scenarios for " + std::string(to_string(bank.domain())) +
              " after " + std::to_string(candidates) + " candidates (target " + std::to_string(target_count) + ")",
          out.size());
    }
    auto request = build_scenario_prompt(bank, options.batch_size);
    request.temperature = options.temperature;
    request.max_tokens = options.max_tokens;
    request.seed = static_cast<std::int64_t>(derive_seed(seed, batch) >> 1);
    std::vector<Scenario> parsed;
    try {
      parsed = parse_scenarios(backend.complete(request), bank.domain());
    } catch (const ParseError&) {
      candidates += static_cast<std::size_t>(options.batch_size);
      continue;
    } catch (const EmptyOutputError&) {
      candidates += static_cast<std::size_t>(options.batch_size);
      continue;
    }
    for (auto& s : parsed) {
      ++candidates;
      if (out.size() == target_count) break;
      const bool dup = std::any_of(out.begin(), out.end(), [&](const Scenario& o) { return is_duplicate(o.text, s.text); }) ||
                       std::any_of(bank.examples().begin(), bank.examples().end(),
                                   [&](const std::string& e) { return dedup_key(e) == dedup_key(s.text); });
      if (dup) continue;
      s.id = scenario_id(bank.domain(), out.size() + 1);
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<Scenario> generate_scenarios(const backend::BackendConfig& config, const FewShotBank& bank,
                                         std::size_t target_count, std::uint64_t seed,
                                         const ScenarioGenOptions& options) {
  if (target_count == 0) return {};
  const auto backend = backend::make_backend(config);
  return generate_scenarios(*backend, bank, target_count, seed, options);
}

}  // namespace disco::scenario
