#include <algorithm>
#include <unordered_map>

#include "disco/disfluency/disfluency.hpp"
#include "disco/errors.hpp"

namespace disco::disfluency {
namespace {

constexpr std::array<std::string_view, 3> kOpNames = {"repetition", "replacement", "restart"};

std::vector<DisfluencySpan> merge_spans(std::vector<DisfluencySpan> injected,
                                        const std::vector<DisfluencySpan>& tagged) {
  const std::size_t n = injected.size();
  for (const auto& s : tagged) {
    const bool clash = std::any_of(injected.begin(), injected.begin() + n, [&](const auto& o) {
      return s.start < o.end && o.start < s.end;
    });
    if (!clash) injected.push_back(s);
  }
  std::sort(injected.begin(), injected.end(),
            [](const auto& a, const auto& b) { return a.start < b.start; });
  return injected;
}

Json spans_json(const std::vector<DisfluencySpan>& spans) {
  Json out = Json::array();
  for (const auto& s : spans) out.push_back(to_json(s));
  return out;
}

}  // namespace

std::string_view to_string(InjectionOp op) noexcept { return kOpNames[static_cast<int>(op)]; }

InjectionOp parse_injection_op(std::string_view s) {
  for (std::size_t i = 0; i < kOpNames.size(); ++i) {
    if (kOpNames[i] == s) return static_cast<InjectionOp>(i);
  }
  throw ArgumentError("unknown injection operation \"" + std::string(s) + "\"");
}

InjectionResult inject_corpus(const Corpus& corpus, const InjectionPlan& plan,
                              const LexiconSet& lexicons, std::uint64_t seed) {
  if (corpus.provenance.contains("edit_traces")) {
    throw ArgumentError("corpus already carries edit traces; invert it before injecting again");
  }
  if (plan.rate < 0.0 || plan.rate > 1.0) throw ArgumentError("injection rate must lie in [0, 1]");
  if (std::any_of(plan.weights.begin(), plan.weights.end(), [](double w) { return w < 0.0; })) {
    throw ArgumentError("operation weights must be non-negative");
  }
  const bool any_op = std::any_of(plan.weights.begin(), plan.weights.end(), [](double w) { return w > 0.0; });
  if (!any_op && plan.rate > 0.0) throw ArgumentError("no injection operation enabled");

  InjectionResult result;
  result.corpus = corpus;
  Json traces = Json::array();

  for (auto& dialog : result.corpus.dialogs) {
    // Per-dialog streams keep the result independent of dialog order.
    Rng rng(derive_seed(seed, dialog.id));
    std::vector<std::size_t> driver_turns;
    for (std::size_t i = 0; i < dialog.turns.size(); ++i) {
      if (dialog.turns[i].speaker == Speaker::driver) driver_turns.push_back(i);
    }
    std::unordered_map<std::size_t, std::string> originals;
    for (const auto i : driver_turns) originals[i] = dialog.turns[i].text;

    for (const auto i : driver_turns) {
      if (!rng.bernoulli(plan.rate)) continue;
      const auto op = static_cast<InjectionOp>(rng.weighted_index(plan.weights));
      Turn& turn = dialog.turns[i];
      Injection inj;
      try {
        switch (op) {
          case InjectionOp::repetition:
            inj = inject_repetition(turn.text, rng);
            break;
          case InjectionOp::replacement:
            inj = inject_replacement(turn.text, lexicons, rng, plan.replacement);
            break;
          case InjectionOp::restart: {
            // Second sequence: another driver utterance of the same dialog.
            std::vector<std::size_t> others;
            for (const auto j : driver_turns) {
              if (j != i) others.push_back(j);
            }
            if (others.empty()) throw NotApplicableError("restart needs a second driver turn");
            const auto& seq2 = originals.at(others[rng.uniform_index(others.size())]);
            inj = inject_restart(turn.text, seq2, rng);
            break;
          }
        }
      } catch (const ArgumentError&) {
        ++result.skipped;
        continue;
      } catch (const NotApplicableError&) {
        ++result.skipped;
        continue;
      }
      traces.push_back(Json{{"dialog_id", dialog.id},
                            {"turn_index", i},
                            {"op", to_string(op)},
                            {"trace", to_json(inj.trace)},
                            {"original_spans", spans_json(turn.disfluency_spans)}});
      turn.disfluency_spans = merge_spans(inj.spans, tag_disfluencies(inj.text, lexicons));
      turn.text = std::move(inj.text);
      ++result.modified;
    }
  }

  result.corpus.provenance["edit_traces"] = std::move(traces);
  result.corpus.provenance["injection"] =
      Json{{"seed", seed},
           {"rate", plan.rate},
           {"weights", Json{{"repetition", plan.weights[0]},
                            {"replacement", plan.weights[1]},
                            {"restart", plan.weights[2]}}},
           {"cue_probability", plan.replacement.cue_probability},
           {"cue_order", plan.replacement.order == CueOrder::substitute_then_cue
                             ? "substitute_then_cue"
                             : "cue_then_substitute"},
           {"modified", result.modified},
           {"skipped", result.skipped}};
  return result;
}

Corpus invert_corpus(const Corpus& corpus) {
  Corpus out = corpus;
  if (!out.provenance.contains("edit_traces")) return out;
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < out.dialogs.size(); ++i) by_id[out.dialogs[i].id] = i;

  const Json& traces = out.provenance.at("edit_traces");
  for (auto it = traces.rbegin(); it != traces.rend(); ++it) {
    const auto id = it->at("dialog_id").get<std::string>();
    const auto found = by_id.find(id);
    if (found == by_id.end()) throw IntegrityError("edit trace names unknown dialog \"" + id + "\"");
    Dialog& dialog = out.dialogs[found->second];
    const auto index = it->at("turn_index").get<std::size_t>();
    if (index >= dialog.turns.size()) throw IntegrityError("edit trace names a missing turn");
    Turn& turn = dialog.turns[index];
    const EditTrace trace = trace_from_json(it->at("trace"));
    std::string restored = invert_trace(trace, turn.text);
    if (restored != trace.original_text) {
      throw IntegrityError("inverting the trace for " + id + " did not restore its text");
    }
    turn.text = std::move(restored);
    turn.disfluency_spans.clear();
    for (const auto& s : it->at("original_spans")) turn.disfluency_spans.push_back(span_from_json(s));
  }
  out.provenance.erase("edit_traces");
  out.provenance.erase("injection");
  return out;
}

}  // namespace disco::disfluency
