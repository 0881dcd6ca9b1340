#include <algorithm>
#include <fstream>

#include "disco/common/text.hpp"
#include "disco/disfluency/disfluency.hpp"
#include "disco/errors.hpp"

namespace disco::disfluency {
namespace {

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open lexicon file " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::vector<std::string> string_list(const Json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + " must be a JSON array of strings");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw ParseError(what + " must contain only strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::map<std::string, std::vector<std::string>> relation(const Json& j, const std::string& what) {
  const Json* entries = &j;
  bool symmetric = false;
  if (j.is_object() && j.contains("entries")) {
    entries = &j.at("entries");
    symmetric = j.value("symmetric", false);
  }
  if (!entries->is_object()) throw ParseError(what + " must map words to word lists");
  std::map<std::string, std::vector<std::string>> out;
  for (auto it = entries->begin(); it != entries->end(); ++it) {
    out[it.key()] = string_list(it.value(), what + "[" + it.key() + "]");
  }
  if (symmetric) symmetrize(out);
  return out;
}

bool is_lowercase(std::string_view s) {
  return std::none_of(s.begin(), s.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
}

}  // namespace

void symmetrize(std::map<std::string, std::vector<std::string>>& rel) {
  const auto snapshot = rel;
  for (const auto& [word, targets] : snapshot) {
    for (const auto& t : targets) {
      auto& back = rel[t];
      if (std::find(back.begin(), back.end(), word) == back.end()) back.push_back(word);
    }
  }
}

void LexiconSet::validate() const {
  auto check = [](const std::string& entry, const char* what) {
    if (text::is_blank(entry)) throw ValidationError(std::string("empty entry in ") + what);
    if (!is_lowercase(entry)) {
      throw ValidationError(std::string(what) + " entry \"" + entry + "\" is not lowercase");
    }
  };
  for (const auto& f : fillers) check(f, "fillers");
  for (const auto& f : delimited_fillers) check(f, "delimited fillers");
  for (const auto& c : repair_cues) check(c, "repair cues");
  for (const auto* rel : {&synonyms, &antonyms}) {
    for (const auto& [w, list] : *rel) {
      check(w, "lexical relations");
      for (const auto& t : list) check(t, "lexical relations");
    }
  }
}

bool LexiconSet::covers(std::string_view word) const {
  const std::string w = text::normalize(word);
  auto has = [&](const auto& rel) {
    auto it = rel.find(w);
    return it != rel.end() && !it->second.empty();
  };
  return has(synonyms) || has(antonyms);
}

LexiconSet load_lexicons(const std::filesystem::path& dir) {
  LexiconSet lex;
  const Json fillers = read_json_file(dir / "fillers.json");
  if (fillers.is_object()) {
    lex.fillers = string_list(fillers.at("fillers"), "fillers");
    if (fillers.contains("delimited_only")) {
      lex.delimited_fillers = string_list(fillers.at("delimited_only"), "delimited_only");
    }
  } else {
    lex.fillers = string_list(fillers, "fillers");
  }
  lex.repair_cues = string_list(read_json_file(dir / "cues.json"), "cues");
  lex.synonyms = relation(read_json_file(dir / "synonyms.json"), "synonyms");
  lex.antonyms = relation(read_json_file(dir / "antonyms.json"), "antonyms");
  lex.validate();
  return lex;
}

}  // namespace disco::disfluency
