#include <fstream>
#include <sstream>

#include "disco/common/paths.hpp"
#include "disco/common/text.hpp"
#include "disco/sim/sim.hpp"

namespace disco::sim {
namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open prompt template " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::string(text::trim(ss.str()));
}

std::string flatten(std::string_view s) {
  std::string out;
  bool ws = false;
  for (const char c : text::trim(s)) {
    if (c == '\n' || c == '\r' || c == '\t' || c == ' ') {
      ws = true;
      continue;
    }
    if (ws && !out.empty()) out += ' ';
    ws = false;
    out += c;
  }
  return out;
}

}  // namespace

std::string_view to_string(PromptStage s) noexcept {
  switch (s) {
    case PromptStage::opening:
      return "opening";
    case PromptStage::regular:
      return "regular";
    case PromptStage::concluding:
      return "concluding";
  }
  return "regular";
}

void SimulationConfig::validate() const {
  if (std::find(kTurnLengths.begin(), kTurnLengths.end(), num_turns) == kTurnLengths.end()) {
    throw ConfigError("num_turns must be one of 6, 8, 10, 12, 14; got " + std::to_string(num_turns));
  }
  if (history_window < 1) throw ConfigError("history_window must be at least 1");
  if (!(driver_temperature >= 0.0) || !(ai_temperature >= 0.0)) {
    throw ConfigError("temperatures must be non-negative");
  }
  if (driver_max_tokens < 1 || ai_max_tokens < 1) throw ConfigError("max_tokens must be positive");
}

PromptTemplates load_templates(const std::filesystem::path& dir) {
  PromptTemplates t;
  t.driver_regular = read_text(dir / "driver_regular.txt");
  t.driver_concluding = read_text(dir / "driver_concluding.txt");
  t.ai_regular = read_text(dir / "ai_regular.txt");
  t.ai_concluding = read_text(dir / "ai_concluding.txt");
  t.version = read_text(dir / "VERSION");
  return t;
}

const PromptTemplates& default_templates() {
  static const PromptTemplates t = load_templates(default_data_dir() / "prompts");
  return t;
}

std::vector<Turn> window_history(std::span<const Turn> history, int k) {
  if (k < 1) throw ArgumentError("history window must be at least 1");
  const std::size_t n = std::min(history.size(), static_cast<std::size_t>(k));
  return {history.end() - static_cast<std::ptrdiff_t>(n), history.end()};
}

std::string render_history(std::span<const Turn> history) {
  std::string out;
  for (const auto& t : history) {
    out += t.speaker == Speaker::driver ? "Driver: " : "Car AI: ";
    out += flatten(t.text);
    out += '\n';
  }
  return out;
}

PromptStage stage_for_turn(std::size_t turn_index, std::size_t num_turns) {
  if (num_turns >= 2 && turn_index + 2 >= num_turns) return PromptStage::concluding;
  if (turn_index == 0) return PromptStage::opening;
  return PromptStage::regular;
}

backend::ChatRequest assemble_driver_prompt(const PromptTemplates& templates, const Scenario& scenario,
                                            std::span<const Turn> history, PromptStage stage,
                                            int history_window) {
  const auto window = window_history(history, history_window);
  backend::ChatRequest r;
  r.messages.push_back({backend::Role::system,
                        stage == PromptStage::concluding ? templates.driver_concluding : templates.driver_regular});
  std::string user;
  if (stage == PromptStage::opening) user += "Scenario: " + flatten(scenario.text) + "\n\n";
  if (window.empty()) {
    user += "Start the conversation with your first request to the car AI.";
  } else {
    user += "Conversation so far:\n" + render_history(window) + "\n";
    user += stage == PromptStage::concluding ? "Write the driver's final line." : "Write the driver's next line.";
  }
  r.messages.push_back({backend::Role::user, std::move(user)});
  return r;
}

backend::ChatRequest assemble_ai_prompt(const PromptTemplates& templates, std::span<const Turn> history,
                                        PromptStage stage, int history_window) {
  const auto window = window_history(history, history_window);
  backend::ChatRequest r;
  r.messages.push_back({backend::Role::system,
                        stage == PromptStage::concluding ? templates.ai_concluding : templates.ai_regular});
  std::string user;
  if (window.empty()) {
    user = "The driver has not said anything yet. Greet the driver and offer help.";
  } else {
    user = "Conversation so far:\n" + render_history(window) + "\nWrite the car AI's reply.";
  }
  r.messages.push_back({backend::Role::user, std::move(user)});
  return r;
}

}  // namespace disco::sim
