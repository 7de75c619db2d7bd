#pragma once

// Closed-class word lists driving the rule-based tagger and cue detector.
// Compiled-in defaults cover the test corpora; the cue set and the un-
// exclusion set can be replaced from data files (one term per line, UTF-8,
// '#' starts a comment line, blank lines ignored).

#include <set>
#include <string>

namespace negkit {

struct Lexicons {
  // Surface forms treated as negation cues.  Includes the clitic "n't",
  // which the tokenizer splits off contracted verbs.
  std::set<std::string> cues;
  // Words starting with "un" that must never be treated as a negating
  // prefix (unit, union, uniform, ...).
  std::set<std::string> un_exclusions;
  // Stems licensed to carry the un- prefix even without a telltale suffix
  // (unhappy -> happy, unsafe -> safe, ...).
  std::set<std::string> un_stems;
  std::set<std::string> determiners;
  std::set<std::string> adpositions;
  std::set<std::string> verbs;       // auxiliaries plus common irregular forms
  std::set<std::string> adjectives;  // colors and frequent visual adjectives
  std::set<std::string> nouns;       // nouns the -ing/-ed suffix rules would misread
  std::set<std::string> fillers;     // conjunctions / pronouns tagged OTHER

  // Immutable compiled-in defaults.
  static const Lexicons& builtin();
};

// Loads one term per line; throws IoError when the file cannot be read and
// FormatError when it contains no terms at all.
std::set<std::string> load_term_file(const std::string& path);

}  // namespace negkit
