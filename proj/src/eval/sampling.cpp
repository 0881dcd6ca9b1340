#include <algorithm>
#include <cmath>
#include <cstdio>

#include "disco/common/random.hpp"
#include "disco/eval/eval.hpp"

namespace disco::eval {
namespace {

/// k of the given items, without replacement, kept in input order.
std::vector<Dialog> draw(std::span<const Dialog* const> items, std::size_t k, Rng& rng) {
  auto picked = rng.sample_indices(items.size(), k);
  std::sort(picked.begin(), picked.end());
  std::vector<Dialog> out;
  out.reserve(k);
  for (const auto i : picked) out.push_back(*items[i]);
  return out;
}

std::vector<const Dialog*> pointers(std::span<const Dialog> dialogs) {
  std::vector<const Dialog*> out;
  for (const auto& d : dialogs) out.push_back(&d);
  return out;
}

}  // namespace

std::vector<Dialog> sample_discodrive(std::span<const Dialog> corpus, std::uint64_t seed, std::size_t per_stratum) {
  std::vector<Dialog> out;
  for (const auto domain : kAllDomains) {
    for (const int length : kTurnLengths) {
      std::vector<const Dialog*> stratum;
      for (const auto& d : corpus) {
        if (d.domain == domain && d.num_turns == static_cast<std::size_t>(length)) stratum.push_back(&d);
      }
      const std::string name = std::string(to_string(domain)) + ", " + std::to_string(length);
      if (stratum.size() < per_stratum) throw UnderstockedError(name, stratum.size(), per_stratum);
      Rng rng(derive_seed(seed, name));
      for (auto& d : draw(stratum, per_stratum, rng)) out.push_back(std::move(d));
    }
  }
  return out;
}

std::vector<Dialog> sample_external(const ExternalSplits& splits, const SplitCounts& counts, std::uint64_t seed) {
  std::vector<Dialog> out;
  const std::array<std::tuple<const char*, const std::vector<Dialog>*, std::size_t>, 3> parts = {{
      {"train", &splits.train, counts.train},
      {"valid", &splits.valid, counts.valid},
      {"test", &splits.test, counts.test},
  }};
  for (const auto& [name, dialogs, k] : parts) {
    if (dialogs->size() < k) throw UnderstockedError(name, dialogs->size(), k);
  }
  for (const auto& [name, dialogs, k] : parts) {
    Rng rng(derive_seed(seed, name));
    const auto ptrs = pointers(*dialogs);
    for (auto& d : draw(ptrs, k, rng)) out.push_back(std::move(d));
  }
  return out;
}

Json to_json(const BlindPair& p) {
  return Json{{"pair_id", p.pair_id},
              {"A", Json{{"source", p.a.source}, {"dialog_id", p.a.dialog_id}}},
              {"B", Json{{"source", p.b.source}, {"dialog_id", p.b.dialog_id}}}};
}

BlindPair pair_from_json(const Json& j) {
  try {
    return BlindPair{j.at("pair_id").get<std::string>(),
                     {j.at("A").at("source").get<std::string>(), j.at("A").at("dialog_id").get<std::string>()},
                     {j.at("B").at("source").get<std::string>(), j.at("B").at("dialog_id").get<std::string>()}};
  } catch (const Json::exception& e) {
    throw ParseError(std::string("pair manifest entry: ") + e.what());
  }
}

std::vector<BlindPair> pair_for_comparison(std::span<const Dialog> set_a, std::span<const Dialog> set_b,
                                           std::uint64_t seed, std::string_view source_a, std::string_view source_b) {
  if (set_a.size() != set_b.size()) {
    throw ArgumentError("cannot pair sets of " + std::to_string(set_a.size()) + " and " +
                        std::to_string(set_b.size()) + " dialogs");
  }
  if (source_a == source_b) throw ArgumentError("the two sources need distinct names");
  Rng rng(derive_seed(seed, "pairs"));
  std::vector<BlindPair> out;
  for (std::size_t i = 0; i < set_a.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "pair-%04zu", i + 1);
    ItemRef first{std::string(source_a), set_a[i].id};
    ItemRef second{std::string(source_b), set_b[i].id};
    if (rng.bernoulli(0.5)) std::swap(first, second);
    out.push_back({id, std::move(first), std::move(second)});
  }
  return out;
}

std::set<std::string> default_service_whitelist() {
  return {"navigation", "weather", "hotel", "attraction", "restaurant"};
}

std::vector<std::string> service_labels(const Dialog& d) {
  std::vector<std::string> out;
  const auto it = d.extra.find("services");
  if (it == d.extra.end() || !it->is_array()) return out;
  for (const auto& s : *it) {
    if (s.is_string() && !s.get<std::string>().empty()) out.push_back(s.get<std::string>());
  }
  return out;
}

FilterResult filter_incar_subset(std::span<const Dialog> dialogs, const std::set<std::string>& whitelist,
                                 std::size_t cap, std::uint64_t seed, bool require_all) {
  FilterResult result;
  std::vector<const Dialog*> qualifying;
  for (const auto& d : dialogs) {
    const auto labels = service_labels(d);
    if (labels.empty()) {
      ++result.unlabeled;
      continue;
    }
    const auto allowed = [&](const std::string& s) { return whitelist.contains(s); };
    const bool ok = require_all ? std::all_of(labels.begin(), labels.end(), allowed)
                                : std::any_of(labels.begin(), labels.end(), allowed);
    if (ok) {
      qualifying.push_back(&d);
    } else {
      ++result.excluded;
    }
  }
  result.qualifying = qualifying.size();
  Rng rng(derive_seed(seed, "incar"));
  result.dialogs = draw(qualifying, std::min(cap, qualifying.size()), rng);
  return result;
}

std::vector<Dialog> split_fraction(std::span<const Dialog> dialogs, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ArgumentError("fraction must lie in (0, 1]");
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(dialogs.size())));
  Rng rng(derive_seed(seed, "fraction"));
  const auto ptrs = pointers(dialogs);
  return draw(ptrs, std::min(k, dialogs.size()), rng);
}

}  // namespace disco::eval
