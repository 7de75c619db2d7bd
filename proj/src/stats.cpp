#include "negkit/stats.hpp"

#include <fstream>

#include "negkit/errors.hpp"
#include "negkit/textparse.hpp"

namespace negkit {

CorpusStats corpus_stats(const std::vector<std::string>& captions, const Lexicons& lex,
                         Execution exec) {
  if (captions.empty()) fail(ErrKind::EmptyCorpus, "the caption corpus is empty");

  const std::vector<ParsedCaption> parsed = parse_batch(captions, lex, exec);
  CorpusStats stats;
  stats.caption_count = captions.size();
  for (const ParsedCaption& caption : parsed) {
    for (const Token& token : caption.tokens) {
      ++stats.token_count;
      ++stats.word_class_distribution[to_string(token.tag)];
      if (!token.is_cue()) continue;
      ++stats.cue_token_count;
      if (token.cue == CueKind::UnPrefix) {
        ++stats.cue_histogram["un-"];
      } else {
        ++stats.cue_histogram[token.surface];
      }
    }
  }
  stats.negation_word_frequency_pct =
      100.0 * static_cast<double>(stats.cue_token_count) /
      static_cast<double>(stats.token_count);
  return stats;
}

std::vector<std::string> read_caption_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrKind::IoError, "cannot open caption file " + path);
  std::vector<std::string> captions;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) captions.push_back(line);
  }
  return captions;
}

njson stats_to_json(const CorpusStats& stats) {
  njson j;
  j["caption_count"] = stats.caption_count;
  j["token_count"] = stats.token_count;
  j["cue_token_count"] = stats.cue_token_count;
  j["negation_word_frequency_pct"] = stats.negation_word_frequency_pct;
  j["cue_histogram"] = stats.cue_histogram;
  j["word_class_distribution"] = stats.word_class_distribution;
  return j;
}

}  // namespace negkit
