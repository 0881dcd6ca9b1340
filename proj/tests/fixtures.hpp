#pragma once

#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "disco/corpus/corpus.hpp"

namespace fixtures {

/// Hand-picked hypothesis / reference pairs: exact copies, reorderings,
/// stem-only matches, repeated words, disjoint sentences, length mismatches.
inline const std::vector<std::pair<std::string, std::string>>& metric_cases() {
  static const std::vector<std::pair<std::string, std::string>> cases = {
      {"turn left at the next light", "turn left at the next light"},
      {"the route is clear", "the road is clear"},
      {"find the nearest gas station", "find a gas station nearby"},
      {"play some jazz music", "play jazz"},
      {"is it going to rain today", "will it rain today"},
      {"the tire pressure is low", "tire pressure looks low on the front left"},
      {"navigate to the office", "take me to work"},
      {"routes routes routes", "route"},
      {"he is driving to the station", "he drives to the stations"},
      {"the the the", "the cat the"},
      {"set temperature to seventy degrees", "set the temperature to 70 degrees"},
      {"a b c d e f", "f e d c b a"},
      {"call my mother", "call mother now"},
      {"heated seats on", "turn on the heated seats"},
      {"traffic is heavy on the highway", "the highway has heavy traffic"},
      {"open the sunroof please", "please open the sunroof"},
      {"what is the weather in pune", "weather in pune"},
      {"check engine light is on", "the check engine light turned on"},
      {"stopping for coffee", "stop for coffees"},
      {"x", "y"},
  };
  return cases;
}

struct TaggedExample {
  std::string text;
  disco::DisfluencyType kind;
};

/// Five reference examples per taxonomy row plus the five from the driver prompt.
inline const std::vector<TaggedExample>& tagger_examples() {
  using disco::DisfluencyType;
  static const std::vector<TaggedExample> ex = {
      {"I think, I think we should take the next exit.", DisfluencyType::repetition},
      {"We could—actually, let’s try the other route.", DisfluencyType::false_start},
      {"Can you, um, check the tire pressure?", DisfluencyType::filler},
      {"I think we’ll be there... um, soon.", DisfluencyType::pause},
      {"Turn left—no, wait, I mean right.", DisfluencyType::correction},
      {"I feel like, I feel like we’re going in the wrong direction.", DisfluencyType::repetition},
      {"I was planning to—actually, wait, do we need gas first?", DisfluencyType::false_start},
      {"So, we’re going to... um, the restaurant?", DisfluencyType::pause},
      {"I’ll pick you up at 6—oh, no, sorry, 6:30.", DisfluencyType::correction},
      {"Can you, um, tell me how far we are from the destination?", DisfluencyType::filler},
  };
  return ex;
}

inline const std::vector<std::string>& fluent_control() {
  static const std::vector<std::string> s = {
      "Turn left at the signal.",
      "How far is the next charging station?",
      "Please set the cabin temperature to 21 degrees.",
      "Is there heavy traffic on the highway?",
      "Play my driving playlist.",
      "What time does the pharmacy close?",
      "Find a parking garage near the stadium.",
      "Check the oil level for me.",
      "Will it snow in Denver tomorrow?",
      "Call my sister on speaker.",
      "Lower the volume a little.",
      "The tire pressure warning came on.",
      "Take the scenic route to the coast.",
      "Is the museum open on Mondays?",
      "Switch the headlights to automatic.",
      "How long until we reach Pune?",
      "Book a table for two at eight.",
      "Read my latest message.",
      "Show me restaurants with outdoor seating.",
      "Open the rear windows halfway.",
  };
  return s;
}

/// Well-formed dialog with `turns` alternating turns.
inline disco::Dialog make_dialog(const std::string& id, disco::DomainTag domain, std::size_t turns) {
  disco::Dialog d;
  d.id = id;
  d.domain = domain;
  d.scenario = {id, domain, "The driver needs help with " + std::string(disco::to_string(domain)) + ".", disco::Json::object()};
  d.num_turns = turns;
  for (std::size_t i = 0; i < turns; ++i) {
    disco::Turn t;
    t.speaker = i % 2 == 0 ? disco::Speaker::driver : disco::Speaker::car_ai;
    t.turn_index = i;
    t.text = (i % 2 == 0 ? "Driver line " : "Car line ") + std::to_string(i) + " of " + id + ".";
    d.turns.push_back(t);
  }
  return d;
}

/// `per_stratum` dialogs for every (domain, length) stratum.
inline std::vector<disco::Dialog> stratified_corpus(std::size_t per_stratum) {
  std::vector<disco::Dialog> out;
  for (const auto domain : disco::kAllDomains) {
    for (const int len : disco::kTurnLengths) {
      for (std::size_t k = 0; k < per_stratum; ++k) {
        char id[96];
        std::snprintf(id, sizeof id, "%s-%02d-%03zu", std::string(disco::to_string(domain)).c_str(), len, k);
        out.push_back(make_dialog(id, domain, static_cast<std::size_t>(len)));
      }
    }
  }
  return out;
}

inline disco::Dialog labeled(const std::string& id, std::vector<std::string> services) {
  auto d = make_dialog(id, disco::DomainTag::local_attractions, 4);
  d.extra["services"] = services;
  return d;
}

struct LikertFixture {
  std::vector<int> values;
  double mean;
  double variance;  // sample variance, worked out by hand
  std::string rendered;
};

/// Small rating sets with hand-computed statistics (z = 1.96).
inline const std::vector<LikertFixture>& likert_fixtures() {
  static const std::vector<LikertFixture> f = {
      {{1, 2, 3, 4, 5}, 3.0, 10.0 / 4.0, "3.0 (\u00b11.39)"},
      {{4, 4, 4, 4}, 4.0, 0.0, "4.0 (\u00b10.00)"},
      {{5, 3}, 4.0, 2.0, "4.0 (\u00b11.96)"},
      {{1, 5, 5, 5, 4, 2}, 22.0 / 6.0, 46.0 / 15.0, "3.7 (\u00b11.40)"},
      {{3, 3, 4, 4, 4, 5, 2, 3, 4, 4}, 3.6, 6.4 / 9.0, "3.6 (\u00b10.52)"},
  };
  return f;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  static std::mt19937_64 salt(std::random_device{}());
  auto dir = std::filesystem::temp_directory_path() / ("disco-test-" + name + "-" + std::to_string(salt() % 1000000));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
