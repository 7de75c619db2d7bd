#pragma once

// Rule-based caption analysis: tokenizer, negation-cue detector, lexicon +
// suffix word-class tagger, and a finite-state phrase chunker.  No learned
// components; every stage is deterministic so downstream merging and the
// dataset statistics are reproducible.

#include <string>
#include <vector>

#include "negkit/execution.hpp"
#include "negkit/json.hpp"
#include "negkit/lexicon.hpp"

namespace negkit {

enum class WordTag { Noun, Verb, Adj, Det, Adp, Neg, Other };
const char* to_string(WordTag tag);
WordTag word_tag_from_string(const std::string& name);  // FormatError on junk

// How a token came to be a negation cue.  WordCue covers the closed cue
// lexicon (no/not/never/...), Contraction the clitic "n't" split off by the
// tokenizer, UnPrefix words like "unpeeled" that negate via prefix.
enum class CueKind { None, WordCue, Contraction, UnPrefix };
const char* to_string(CueKind kind);  // "word-cue" / "contraction" / "un-prefix"

struct Token {
  std::string surface;  // lowercased
  std::size_t index = 0;
  WordTag tag = WordTag::Other;
  CueKind cue = CueKind::None;

  bool is_cue() const { return cue != CueKind::None; }
};

struct Phrase {
  std::vector<std::size_t> token_indices;  // ascending, contiguous
  bool is_negated = false;                 // true iff the span holds >= 1 cue
  std::size_t head_index = 0;              // content head (last noun etc.)
};

struct ParsedCaption {
  std::string raw;
  std::vector<Token> tokens;
  std::vector<Phrase> phrases;  // ordered partition of the tokens
};

// Lowercases, splits on whitespace, peels leading/trailing ASCII punctuation
// into standalone tokens, and splits the "n't" clitic off contracted verbs
// ("isn't" -> "is" + "n't").  Throws EmptyCaption for blank input.
std::vector<Token> tokenize(const std::string& caption);

// Marks cue tokens: cue-lexicon surfaces get tag NEG plus a word-cue or
// contraction kind; an "un..." word is flagged un-prefix (tag untouched)
// when its stem has >= 3 chars and is either a licensed stem or ends in
// -ed/-ing/-able, and the surface is not on the exclusion list.
void detect_cues(std::vector<Token>& tokens, const Lexicons& lex = Lexicons::builtin());

// Assigns word classes to the remaining tokens: punctuation -> OTHER, then
// closed-class lexicons (DET/ADP/filler/verb/adjective/noun), then the
// -ing / -ed verb suffix rules, default NOUN.  Un-prefix cues tag ADJ.
// Never overrides a NEG set by detect_cues.
void tag_tokens(std::vector<Token>& tokens, const Lexicons& lex = Lexicons::builtin());

// Greedy left-to-right chunker over the tag sequence:
//
//   NegP := NEG (DET|ADP|ADJ)* (NOUN+ | VERB | ADJ)
//   NP   := DET? ADJ* NOUN+
//   VP   := VERB+
//
// Policy, pinned for reproducibility: the NegP modifier run is consumed
// greedily; if it ends without a NOUN/VERB content token but its last
// consumed token is an ADJ, that ADJ is the content.  A cue with no content
// available (caption-final, or blocked by a non-phrase token) forms a
// singleton negated phrase.  Failed NP/VP attempts fall back to a singleton
// of their first token.  Tokens no production covers become singletons.
// The result is always an ordered partition of the input.
std::vector<Phrase> chunk(const std::vector<Token>& tokens);

// tokenize + detect_cues + tag_tokens + chunk.
ParsedCaption parse_caption(const std::string& caption,
                            const Lexicons& lex = Lexicons::builtin());

// Batch driver; Serial and Parallel produce identical output.
std::vector<ParsedCaption> parse_batch(const std::vector<std::string>& captions,
                                       const Lexicons& lex, Execution exec);

// Wire format used by the CLI `parse` subcommand, one object per caption:
//   {"raw": ..., "tokens": [{"surface", "tag", "cue_kind"}],
//    "phrases": [{"indices", "is_negated"}]}
// cue_kind is null for non-cue tokens.
njson parsed_to_json(const ParsedCaption& parsed);
ParsedCaption parsed_from_json(const njson& j);  // FormatError on junk

}  // namespace negkit
