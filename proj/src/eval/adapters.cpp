#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>

#include "disco/common/text.hpp"
#include "disco/eval/eval.hpp"

namespace disco::eval {
namespace {

Json load_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw NotFoundError("cannot open " + file.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

/// A file, or every *.json below a directory in path order.
std::vector<std::filesystem::path> json_files(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) throw NotFoundError("no such file or directory: " + path.string());
  if (!fs::is_directory(path)) return {path};
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(path)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && e.path().extension() == ".json" && name != "schema.json") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string numbered(std::string_view prefix, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%05zu", i);
  return std::string(prefix) + buf;
}

Dialog make_dialog(std::string id, std::string_view source, std::string_view split,
                   std::vector<std::string> services, std::vector<Turn> turns) {
  Dialog d;
  d.id = std::move(id);
  d.domain = domain_for_services(services);
  d.scenario.id = d.id;
  d.scenario.domain = d.domain;
  d.scenario.text = std::string(source) + " dialog";
  for (std::size_t i = 0; i < turns.size(); ++i) turns[i].turn_index = i;
  d.num_turns = turns.size();
  d.turns = std::move(turns);
  d.extra["source"] = source;
  d.extra["split"] = split;
  d.extra["services"] = services;
  return d;
}

/// MultiWOZ 2.2 and SGD share one dialogue layout.
Corpus read_schema_guided(const std::filesystem::path& path, std::string_view source, std::string_view split) {
  Corpus corpus;
  for (const auto& file : json_files(path)) {
    const Json root = load_json(file);
    if (!root.is_array()) throw ParseError(file.string() + ": expected an array of dialogues");
    for (const auto& dj : root) {
      try {
        std::vector<std::string> services;
        for (const auto& s : dj.at("services")) {
          auto name = normalize_service(s.get<std::string>());
          if (std::find(services.begin(), services.end(), name) == services.end()) services.push_back(name);
        }
        std::vector<Turn> turns;
        for (const auto& tj : dj.at("turns")) {
          Turn t;
          t.speaker = tj.at("speaker").get<std::string>() == "USER" ? Speaker::driver : Speaker::car_ai;
          t.text = tj.at("utterance").get<std::string>();
          turns.push_back(std::move(t));
        }
        std::string id = dj.at("dialogue_id").get<std::string>();
        if (id.size() > 5 && id.ends_with(".json")) id.resize(id.size() - 5);
        corpus.dialogs.push_back(make_dialog(std::string(source) + "-" + id, source, split, std::move(services),
                                             std::move(turns)));
      } catch (const Json::exception& e) {
        throw ParseError(file.string() + ": " + e.what());
      }
    }
  }
  corpus.provenance = Json{{"generator", std::string(source) + "-adapter"}, {"split", split}};
  return corpus;
}

}  // namespace

std::string normalize_service(std::string_view raw) {
  std::string s(text::trim(raw));
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  const auto underscore = s.rfind('_');
  if (underscore != std::string::npos && underscore + 1 < s.size() &&
      std::all_of(s.begin() + static_cast<std::ptrdiff_t>(underscore) + 1, s.end(),
                  [](unsigned char c) { return std::isdigit(c); })) {
    s.resize(underscore);
  }
  static const std::map<std::string, std::string, std::less<>> aliases = {
      {"hotels", "hotel"},           {"restaurants", "restaurant"}, {"travel", "attraction"},
      {"attractions", "attraction"}, {"navigate", "navigation"},    {"weathers", "weather"},
  };
  if (const auto it = aliases.find(s); it != aliases.end()) return it->second;
  return s;
}

DomainTag domain_for_services(const std::vector<std::string>& services) {
  for (const auto& s : services) {
    if (s == "navigation") return DomainTag::navigation;
  }
  for (const auto& s : services) {
    if (s == "weather") return DomainTag::weather;
  }
  for (const auto& s : services) {
    if (s == "schedule") return DomainTag::car_functions;
  }
  return DomainTag::local_attractions;
}

Corpus read_kvret(const std::filesystem::path& file, std::string_view split) {
  const Json root = load_json(file);
  if (!root.is_array()) throw ParseError(file.string() + ": expected an array of dialogues");
  Corpus corpus;
  for (std::size_t i = 0; i < root.size(); ++i) {
    const auto& dj = root[i];
    try {
      std::vector<std::string> services;
      std::string id = numbered("kvret-" + std::string(split) + "-", i + 1);
      if (dj.contains("scenario")) {
        const auto& sc = dj["scenario"];
        if (sc.contains("task") && sc["task"].contains("intent")) {
          services.push_back(normalize_service(sc["task"]["intent"].get<std::string>()));
        }
        if (sc.contains("uuid") && sc["uuid"].is_string()) id = "kvret-" + sc["uuid"].get<std::string>();
      }
      std::vector<Turn> turns;
      for (const auto& tj : dj.at("dialogue")) {
        Turn t;
        t.speaker = tj.at("turn").get<std::string>() == "driver" ? Speaker::driver : Speaker::car_ai;
        t.text = tj.at("data").at("utterance").get<std::string>();
        turns.push_back(std::move(t));
      }
      corpus.dialogs.push_back(make_dialog(std::move(id), "kvret", split, std::move(services), std::move(turns)));
    } catch (const Json::exception& e) {
      throw ParseError(file.string() + ": dialogue " + std::to_string(i) + ": " + e.what());
    }
  }
  corpus.provenance = Json{{"generator", "kvret-adapter"}, {"split", split}};
  return corpus;
}

Corpus read_multiwoz(const std::filesystem::path& path, std::string_view split) {
  return read_schema_guided(path, "multiwoz", split);
}

Corpus read_sgd(const std::filesystem::path& path, std::string_view split) {
  return read_schema_guided(path, "sgd", split);
}

}  // namespace disco::eval
