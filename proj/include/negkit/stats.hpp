#pragma once

// Corpus-level negation statistics.
//
// Every caption is tokenized and cue-marked with the standard parser; counts
// cover ALL tokens the tokenizer emits, punctuation tokens included.  Cue
// tokens are word cues ("no", "not", ...), the split "n't" clitic, and
// un-prefixed words.  The cue histogram buckets word cues and "n't" by their
// surface and folds every un-prefixed word into a single "un-" bucket; the
// word-class distribution counts tokens per tag name.

#include <map>
#include <string>
#include <vector>

#include "negkit/execution.hpp"
#include "negkit/json.hpp"
#include "negkit/lexicon.hpp"

namespace negkit {

struct CorpusStats {
  std::size_t caption_count = 0;
  std::size_t token_count = 0;
  std::size_t cue_token_count = 0;
  double negation_word_frequency_pct = 0.0;  // 100 * cue_token_count / token_count
  std::map<std::string, std::size_t> cue_histogram;
  std::map<std::string, std::size_t> word_class_distribution;
};

// EmptyCorpus when captions is empty; a blank caption propagates EmptyCaption.
CorpusStats corpus_stats(const std::vector<std::string>& captions,
                         const Lexicons& lex = Lexicons::builtin(),
                         Execution exec = Execution::Parallel);

// One caption per line; blank lines are skipped.  IoError on unreadable path.
std::vector<std::string> read_caption_lines(const std::string& path);

njson stats_to_json(const CorpusStats& stats);

}  // namespace negkit
