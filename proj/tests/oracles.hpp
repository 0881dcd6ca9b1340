#pragma once

// Brute-force reference implementations used to check the metric kernels.
// They share nothing with src/metrics except the stemmer.

#include <string>
#include <vector>

namespace oracle {

using Sentence = std::vector<std::string>;

/// Distinct n-grams / all n-grams, by set and multiset enumeration.
double distinct(const std::vector<Sentence>& utterances, int n);

/// Corpus BLEU-1..max_n; add-one smoothing on orders >= 2 when `smooth`.
std::vector<double> bleu(const std::vector<Sentence>& hyps, const std::vector<Sentence>& refs, int max_n,
                         bool smooth);

/// Plain recursive LCS.
std::size_t lcs(const Sentence& a, const Sentence& b);
double rouge_l(const Sentence& hyp, const Sentence& ref);

struct Alignment {
  std::size_t exact = 0;
  std::size_t stem = 0;
  std::size_t chunks = 0;
};

/// Every injective hyp -> ref matching enumerated; best by most exact, most
/// stem, fewest chunks.
Alignment meteor_alignment(const Sentence& hyp, const Sentence& ref);
double meteor(const Sentence& hyp, const Sentence& ref);

}  // namespace oracle
