#include <algorithm>

#include "disco/common/text.hpp"
#include "disco/corpus/corpus.hpp"

namespace disco {
namespace {

void add(std::vector<Violation>& out, std::string code, std::optional<std::size_t> turn,
         std::string message) {
  out.push_back({std::move(code), turn, std::move(message)});
}

}  // namespace

ValidationReport validate_dialog(const Dialog& dialog, ValidationPolicy policy) {
  ValidationReport report;
  auto& v = report.violations;

  if (dialog.id.empty()) add(v, "EMPTY_ID", std::nullopt, "dialog id is empty");
  if (text::is_blank(dialog.scenario.text)) {
    add(v, "SCENARIO_EMPTY", std::nullopt, "scenario text is empty");
  }
  if (dialog.scenario.domain != dialog.domain) {
    add(v, "SCENARIO_DOMAIN", std::nullopt,
        "scenario domain " + std::string(to_string(dialog.scenario.domain)) +
            " differs from dialog domain " + std::string(to_string(dialog.domain)));
  }
  if (dialog.num_turns != dialog.turns.size()) {
    add(v, "NUM_TURNS_MISMATCH", std::nullopt,
        "num_turns is " + std::to_string(dialog.num_turns) + " but " +
            std::to_string(dialog.turns.size()) + " turns are present");
  }
  if (dialog.turns.empty()) {
    add(v, "NO_TURNS", std::nullopt, "dialog has no turns");
  } else {
    if (dialog.turns.front().speaker != Speaker::driver) {
      add(v, "FIRST_SPEAKER", 0, "turn 0 must be spoken by the driver");
    }
    if (dialog.turns.back().speaker != Speaker::car_ai) {
      add(v, "FINAL_SPEAKER", dialog.turns.size() - 1, "final turn must be spoken by the car AI");
    }
  }

  for (std::size_t i = 0; i < dialog.turns.size(); ++i) {
    const Turn& t = dialog.turns[i];
    if (t.turn_index != i) {
      add(v, "TURN_INDEX", i,
          "turn_index " + std::to_string(t.turn_index) + " at position " + std::to_string(i));
    }
    if (i > 0 && t.speaker == dialog.turns[i - 1].speaker) {
      add(v, "ALTERNATION", i,
          "turn " + std::to_string(i) + " repeats speaker " + std::string(to_string(t.speaker)));
    }
    if (text::is_blank(t.text)) add(v, "EMPTY_TEXT", i, "turn text is empty");

    const std::size_t len = text::codepoint_length(t.text);
    for (std::size_t s = 0; s < t.disfluency_spans.size(); ++s) {
      const auto& span = t.disfluency_spans[s];
      if (!(span.start < span.end) || span.end > len) {
        add(v, "SPAN_BOUNDS", i,
            "span [" + std::to_string(span.start) + ", " + std::to_string(span.end) +
                ") outside text of length " + std::to_string(len));
      }
      if (s > 0 && span.start < t.disfluency_spans[s - 1].end) {
        add(v, "SPAN_OVERLAP", i, "spans are unsorted or overlap at index " + std::to_string(s));
      }
    }
  }

  const std::size_t n = dialog.turns.size();
  const bool allowed = std::find(kTurnLengths.begin(), kTurnLengths.end(),
                                 static_cast<int>(n)) != kTurnLengths.end();
  if (!allowed) {
    Violation length{"TURN_LENGTH", std::nullopt,
                     std::to_string(n) + " turns is not one of 6, 8, 10, 12, 14"};
    (policy.strict_lengths ? report.violations : report.warnings).push_back(std::move(length));
  }
  return report;
}

Json to_json(const Violation& v) {
  Json j{{"code", v.code}, {"message", v.message}};
  j["turn"] = v.turn ? Json(*v.turn) : Json(nullptr);
  return j;
}

}  // namespace disco
