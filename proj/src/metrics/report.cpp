#include <cstdio>
#include <fstream>
#include <sstream>

#include "disco/common/text.hpp"
#include "disco/errors.hpp"
#include "disco/metrics/metrics.hpp"

namespace disco::metrics {
namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string field(const Json& j, const char* name, std::size_t index) {
  const auto it = j.find(name);
  if (it == j.end() || !it->is_string()) {
    throw ParseError(std::string("record is missing string field \"") + name + "\"", index);
  }
  return it->get<std::string>();
}

}  // namespace

std::vector<GenerationRecord> read_generations(std::istream& in) {
  std::vector<GenerationRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    if (!j.is_object()) throw ParseError("record is not a JSON object", line_no);
    out.push_back({field(j, "context", line_no), field(j, "reference", line_no),
                   field(j, "hypothesis", line_no)});
  }
  return out;
}

std::vector<GenerationRecord> read_generations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path.string());
  return read_generations(in);
}

MetricReport corpus_report(std::span<const GenerationRecord> records, const MetricParams& params) {
  params.validate();
  if (records.empty()) throw ArgumentError("no generation records to score");
  std::vector<Tokens> hyps;
  std::vector<Tokens> refs;
  MetricReport report;
  for (const auto& r : records) {
    hyps.push_back(text::metric_tokens(r.hypothesis, params.lowercase));
    refs.push_back(text::metric_tokens(r.reference, params.lowercase));
    report.hypothesis_tokens += hyps.back().size();
    report.reference_tokens += refs.back().size();
  }
  report.sentences = records.size();
  for (const double b : bleu(hyps, refs, params)) report.bleu.push_back(100.0 * b);
  report.rouge_l = 100.0 * rouge_l(hyps, refs, params);
  report.meteor = 100.0 * meteor(hyps, refs, params);
  return report;
}

MetricReport corpus_report(const std::filesystem::path& path, const MetricParams& params) {
  const auto records = read_generations(path);
  return corpus_report(records, params);
}

Json to_json(const MetricReport& report) {
  Json j;
  for (std::size_t i = 0; i < report.bleu.size(); ++i) {
    j["bleu_" + std::to_string(i + 1)] = report.bleu[i];
  }
  j["rouge_l"] = report.rouge_l;
  j["meteor"] = report.meteor;
  j["sentences"] = report.sentences;
  j["hypothesis_tokens"] = report.hypothesis_tokens;
  j["reference_tokens"] = report.reference_tokens;
  return j;
}

std::string render_table(const MetricReport& report, bool bertscore_column) {
  std::vector<std::string> head;
  std::vector<std::string> row;
  for (std::size_t i = 0; i < report.bleu.size(); ++i) {
    head.push_back("BLEU-" + std::to_string(i + 1));
    row.push_back(fixed(report.bleu[i], 2));
  }
  head.push_back("ROUGE-L");
  row.push_back(fixed(report.rouge_l, 2));
  head.push_back("METEOR");
  row.push_back(fixed(report.meteor, 2));
  if (bertscore_column) {
    head.push_back("BERTScore F1");
    row.push_back("\xE2\x80\x94");  // not computed
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < head.size(); ++i) {
    const std::size_t w = std::max<std::size_t>(head[i].size(), 7);
    out << (i ? " | " : "") << pad(head[i], w);
  }
  out << '\n';
  for (std::size_t i = 0; i < head.size(); ++i) {
    const std::size_t w = std::max<std::size_t>(head[i].size(), 7);
    // The em dash is three bytes but one column wide.
    const std::size_t extra = row[i] == "\xE2\x80\x94" ? 2 : 0;
    out << (i ? " | " : "") << pad(row[i], w + extra);
  }
  out << '\n';
  return out.str();
}

std::string render_distinct_table(std::span<const DistinctColumn> columns, int max_n) {
  if (max_n < 1) throw ArgumentError("max_n must be at least 1");
  std::ostringstream out;
  const std::size_t first = 8;
  out << std::string("N-Gram") + std::string(first - 6, ' ');
  std::vector<std::size_t> widths;
  for (const auto& c : columns) {
    widths.push_back(std::max<std::size_t>(c.name.size(), 6));
    out << " | " << pad(c.name, widths.back());
  }
  out << '\n';
  for (int n = 1; n <= max_n; ++n) {
    const std::string label = std::to_string(n) + "-gram";
    out << label << std::string(first > label.size() ? first - label.size() : 0, ' ');
    for (std::size_t i = 0; i < columns.size(); ++i) {
      out << " | " << pad(fixed(distinct_n(columns[i].utterances, n), 4), widths[i]);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace disco::metrics
