#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "disco/errors.hpp"
#include "disco/metrics/metrics.hpp"

namespace disco::metrics {
namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngram_counts(const Tokens& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return counts;
}

void check_pair_lists(std::size_t hyps, std::size_t refs) {
  if (hyps != refs) {
    throw ArgumentError("hypothesis and reference lists differ in length (" + std::to_string(hyps) +
                        " vs " + std::to_string(refs) + ")");
  }
  if (hyps == 0) throw ArgumentError("no hypothesis/reference pairs");
}

}  // namespace

void MetricParams::validate() const {
  if (max_n < 1) throw ArgumentError("max_n must be at least 1");
  for (const double v : {smoothing_k, rouge_beta, meteor_alpha, meteor_beta, meteor_gamma}) {
    if (!(v >= 0.0)) throw ArgumentError("metric parameters must be non-negative");
  }
  if (meteor_alpha > 1.0) throw ArgumentError("meteor_alpha must not exceed 1");
}

double distinct_n(std::span<const Tokens> utterances, int n) {
  if (n < 1) throw ArgumentError("distinct-n needs n >= 1");
  std::set<std::vector<std::string>> unique;
  std::size_t total = 0;
  for (const auto& u : utterances) {
    for (const auto& [gram, count] : ngram_counts(u, static_cast<std::size_t>(n))) {
      unique.insert(gram);
      total += count;
    }
  }
  if (total == 0) {
    throw InsufficientDataError("distinct-" + std::to_string(n) + " undefined: no utterance has " +
                                std::to_string(n) + " tokens");
  }
  return static_cast<double>(unique.size()) / static_cast<double>(total);
}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  if (matches.size() < other.matches.size()) {
    matches.resize(other.matches.size());
    totals.resize(other.totals.size());
  }
  for (std::size_t i = 0; i < other.matches.size(); ++i) {
    matches[i] += other.matches[i];
    totals[i] += other.totals[i];
  }
  hyp_length += other.hyp_length;
  ref_length += other.ref_length;
  return *this;
}

BleuStats bleu_stats(const Tokens& hypothesis, const Tokens& reference, int max_n) {
  BleuStats s;
  s.matches.assign(static_cast<std::size_t>(max_n), 0);
  s.totals.assign(static_cast<std::size_t>(max_n), 0);
  s.hyp_length = hypothesis.size();
  s.ref_length = reference.size();
  for (std::size_t n = 1; n <= static_cast<std::size_t>(max_n); ++n) {
    const auto hyp = ngram_counts(hypothesis, n);
    const auto ref = ngram_counts(reference, n);
    for (const auto& [gram, count] : hyp) {
      s.totals[n - 1] += count;
      const auto it = ref.find(gram);
      if (it != ref.end()) s.matches[n - 1] += std::min(count, it->second);
    }
  }
  return s;
}

std::vector<double> bleu_from_stats(const BleuStats& stats, const MetricParams& params) {
  const auto max_n = static_cast<std::size_t>(params.max_n);
  std::vector<double> scores(max_n, 0.0);
  if (stats.hyp_length == 0) return scores;

  const double c = static_cast<double>(stats.hyp_length);
  const double r = static_cast<double>(stats.ref_length);
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);

  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 1; n <= max_n; ++n) {
    double num = static_cast<double>(n - 1 < stats.matches.size() ? stats.matches[n - 1] : 0);
    double den = static_cast<double>(n - 1 < stats.totals.size() ? stats.totals[n - 1] : 0);
    if (params.bleu_smoothing == BleuSmoothing::add_k && n >= 2) {
      num += params.smoothing_k;
      den += params.smoothing_k;
    }
    if (num <= 0.0 || den <= 0.0) zero = true;
    if (!zero) log_sum += std::log(num / den);
    scores[n - 1] = zero ? 0.0 : bp * std::exp(log_sum / static_cast<double>(n));
  }
  return scores;
}

std::vector<double> bleu(std::span<const Tokens> hypotheses, std::span<const Tokens> references,
                         const MetricParams& params) {
  params.validate();
  check_pair_lists(hypotheses.size(), references.size());
  if (params.bleu_mode == BleuMode::corpus) {
    BleuStats total;
    for (std::size_t i = 0; i < hypotheses.size(); ++i) {
      total += bleu_stats(hypotheses[i], references[i], params.max_n);
    }
    return bleu_from_stats(total, params);
  }
  std::vector<double> mean(static_cast<std::size_t>(params.max_n), 0.0);
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto s = bleu_from_stats(bleu_stats(hypotheses[i], references[i], params.max_n), params);
    for (std::size_t n = 0; n < mean.size(); ++n) mean[n] += s[n];
  }
  for (auto& m : mean) m /= static_cast<double>(hypotheses.size());
  return mean;
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const Tokens& hypothesis, const Tokens& reference, const MetricParams& params) {
  if (hypothesis.empty() || reference.empty()) return 0.0;
  const double l = static_cast<double>(lcs_length(hypothesis, reference));
  if (l == 0.0) return 0.0;
  const double p = l / static_cast<double>(hypothesis.size());
  const double r = l / static_cast<double>(reference.size());
  const double b2 = params.rouge_beta * params.rouge_beta;
  return (1.0 + b2) * p * r / (r + b2 * p);
}

double rouge_l(std::span<const Tokens> hypotheses, std::span<const Tokens> references,
               const MetricParams& params) {
  check_pair_lists(hypotheses.size(), references.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) sum += rouge_l(hypotheses[i], references[i], params);
  return sum / static_cast<double>(hypotheses.size());
}

namespace {

/// Branch-and-bound over hypothesis positions for the alignment with the
/// maximum exact matches, then maximum stem matches, then fewest chunks.
class MeteorAligner {
 public:
  MeteorAligner(const Tokens& hyp, const Tokens& ref) : hyp_(hyp), ref_(ref) {
    for (const auto& w : hyp) hyp_stems_.push_back(porter_stem(w));
    for (const auto& w : ref) ref_stems_.push_back(porter_stem(w));
    exact_.resize(hyp.size());
    stem_.resize(hyp.size());
    for (std::size_t i = 0; i < hyp.size(); ++i) {
      for (std::size_t j = 0; j < ref.size(); ++j) {
        if (hyp[i] == ref[j]) {
          exact_[i].push_back(j);
        } else if (hyp_stems_[i] == ref_stems_[j]) {
          stem_[i].push_back(j);
        }
      }
    }
    // Every maximum exact matching matches min(count) occurrences of each word.
    std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
    for (const auto& w : hyp) ++counts[w].first;
    for (const auto& w : ref) ++counts[w].second;
    for (const auto& [w, c] : counts) {
      target_exact_[w] = std::min(c.first, c.second);
      target_exact_total_ += target_exact_[w];
    }
    remaining_.assign(hyp.size() + 1, {});
    for (std::size_t i = hyp.size(); i-- > 0;) {
      remaining_[i] = remaining_[i + 1];
      ++remaining_[i][hyp[i]];
    }
    target_stem_ = max_stem_matches();
    stem_possible_after_.assign(hyp.size() + 1, 0);
    for (std::size_t i = hyp.size(); i-- > 0;) {
      stem_possible_after_[i] = stem_possible_after_[i + 1] + (stem_[i].empty() ? 0 : 1);
    }
  }

  MeteorAlignment solve() {
    used_.assign(ref_.size(), false);
    matched_exact_.clear();
    best_chunks_ = std::numeric_limits<std::size_t>::max();
    search(0, static_cast<std::size_t>(-1), 0, 0, 0);
    MeteorAlignment a;
    a.exact = target_exact_total_;
    a.stem = target_stem_;
    if (a.matches() == 0) {
      a.chunks = 0;
    } else {
      // Budget exhausted without a complete alignment: assume no adjacency.
      a.chunks = best_chunks_ == std::numeric_limits<std::size_t>::max() ? a.matches() : best_chunks_;
    }
    return a;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  /// Stem matches achievable after exact matching; independent of which
  /// maximum exact matching is chosen, since leftovers differ only by position.
  std::size_t max_stem_matches() const {
    // Greedy exact matching by position, then Kuhn augmenting paths for stems.
    std::vector<bool> ref_used(ref_.size(), false);
    std::vector<bool> hyp_used(hyp_.size(), false);
    for (std::size_t i = 0; i < hyp_.size(); ++i) {
      for (const auto j : exact_[i]) {
        if (!ref_used[j]) {
          ref_used[j] = hyp_used[i] = true;
          break;
        }
      }
    }
    std::vector<std::size_t> owner(ref_.size(), kNone);
    std::size_t matched = 0;
    for (std::size_t i = 0; i < hyp_.size(); ++i) {
      if (hyp_used[i]) continue;
      std::vector<bool> seen(ref_.size(), false);
      if (augment(i, ref_used, owner, seen)) ++matched;
    }
    return matched;
  }

  bool augment(std::size_t i, const std::vector<bool>& ref_used, std::vector<std::size_t>& owner,
               std::vector<bool>& seen) const {
    for (const auto j : stem_[i]) {
      if (ref_used[j] || seen[j]) continue;
      seen[j] = true;
      if (owner[j] == kNone || augment(owner[j], ref_used, owner, seen)) {
        owner[j] = i;
        return true;
      }
    }
    return false;
  }

  void search(std::size_t i, std::size_t prev_ref, std::size_t exact, std::size_t stem,
              std::size_t chunks) {
    if (chunks >= best_chunks_ || ++nodes_ > kNodeBudget) return;
    if (stem + stem_possible_after_[i] < target_stem_) return;
    if (i == hyp_.size()) {
      if (exact == target_exact_total_ && stem == target_stem_) best_chunks_ = chunks;
      return;
    }
    const std::string& w = hyp_[i];
    const std::size_t need = target_exact_.at(w) - matched_exact_[w];
    const std::size_t left = remaining_[i].at(w);  // occurrences of w at positions >= i
    for (const auto j : exact_[i]) {
      if (used_[j] || need == 0) continue;
      used_[j] = true;
      ++matched_exact_[w];
      search(i + 1, j, exact + 1, stem, chunks + (prev_ref != kNone && j == prev_ref + 1 ? 0 : 1));
      --matched_exact_[w];
      used_[j] = false;
    }
    // Leaving position i without an exact match is allowed only if later
    // occurrences of w can still meet the exact target.
    if (left - 1 < need) return;
    for (const auto j : stem_[i]) {
      if (used_[j]) continue;
      used_[j] = true;
      search(i + 1, j, exact, stem + 1, chunks + (prev_ref != kNone && j == prev_ref + 1 ? 0 : 1));
      used_[j] = false;
    }
    search(i + 1, kNone, exact, stem, chunks);
  }

  static constexpr std::size_t kNodeBudget = 2'000'000;

  const Tokens& hyp_;
  const Tokens& ref_;
  Tokens hyp_stems_;
  Tokens ref_stems_;
  std::vector<std::vector<std::size_t>> exact_;
  std::vector<std::vector<std::size_t>> stem_;
  std::map<std::string, std::size_t> target_exact_;
  std::size_t target_exact_total_ = 0;
  std::size_t target_stem_ = 0;
  std::vector<std::map<std::string, std::size_t>> remaining_;
  std::vector<std::size_t> stem_possible_after_;

  std::vector<bool> used_;
  std::map<std::string, std::size_t> matched_exact_;
  std::size_t best_chunks_ = 0;
  std::size_t nodes_ = 0;
};

}  // namespace

MeteorAlignment meteor_align(const Tokens& hypothesis, const Tokens& reference) {
  return MeteorAligner(hypothesis, reference).solve();
}

double meteor_score(const MeteorAlignment& a, std::size_t hyp_length, std::size_t ref_length,
                    const MetricParams& params) {
  const std::size_t m = a.matches();
  if (m == 0 || hyp_length == 0 || ref_length == 0) return 0.0;
  const double p = static_cast<double>(m) / static_cast<double>(hyp_length);
  const double r = static_cast<double>(m) / static_cast<double>(ref_length);
  const double fmean = p * r / (params.meteor_alpha * p + (1.0 - params.meteor_alpha) * r);
  const double penalty =
      params.meteor_gamma *
      std::pow(static_cast<double>(a.chunks) / static_cast<double>(m), params.meteor_beta);
  return fmean * (1.0 - penalty);
}

double meteor(const Tokens& hypothesis, const Tokens& reference, const MetricParams& params) {
  return meteor_score(meteor_align(hypothesis, reference), hypothesis.size(), reference.size(), params);
}

double meteor(std::span<const Tokens> hypotheses, std::span<const Tokens> references,
              const MetricParams& params) {
  check_pair_lists(hypotheses.size(), references.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) sum += meteor(hypotheses[i], references[i], params);
  return sum / static_cast<double>(hypotheses.size());
}

}  // namespace disco::metrics
