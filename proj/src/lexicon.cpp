#include "negkit/lexicon.hpp"

#include <fstream>

#include "negkit/errors.hpp"

namespace negkit {

namespace {

Lexicons make_builtin() {
  Lexicons lex;
  lex.cues = {"no", "not", "never", "without", "n't", "none", "neither", "nor"};
  lex.un_exclusions = {"under",  "union",   "unit",      "units",    "united",
                       "unique", "universe", "universal", "university",
                       "uniform", "uniforms", "unless",   "until",    "uncle",
                       "unison", "unanimous", "unicorn"};
  lex.un_stems = {"happy",  "safe",   "fair",   "clear",  "clean",  "even",
                  "well",   "fit",    "kind",   "sure",   "true",   "real",
                  "ripe",   "wise",   "common", "likely", "lucky",  "healthy",
                  "friendly", "steady", "stable", "equal", "usual", "easy",
                  "tidy",   "certain", "aware",  "cut",    "read",   "lit"};
  lex.determiners = {"a",     "an",    "the",   "this",  "that",  "these",
                     "those", "my",    "your",  "his",   "her",   "its",
                     "our",   "their", "some",  "any",   "each",  "every",
                     "both",  "all",   "few",   "several", "most", "another"};
  lex.adpositions = {"in",      "on",      "at",      "by",      "for",
                     "from",    "of",      "off",     "to",      "with",
                     "into",    "onto",    "over",    "under",   "above",
                     "below",   "behind",  "beside",  "between", "near",
                     "through", "during",  "against", "along",   "around",
                     "before",  "after",   "up",      "down",    "inside",
                     "outside", "toward",  "towards", "upon",    "within",
                     "beneath", "across",  "among",   "past"};
  lex.verbs = {"is",    "are",   "was",   "were",  "be",    "been",  "being",
               "am",    "do",    "does",  "did",   "has",   "have",  "had",
               "can",   "could", "will",  "would", "shall", "should", "may",
               "might", "must",  "sit",   "sits",  "sat",   "stand", "stands",
               "stood", "lie",   "lies",  "lay",   "hold",  "holds", "held",
               "wear",  "wears", "wore",  "eat",   "eats",  "ate",   "drink",
               "drinks", "drank", "see",  "sees",  "saw",   "go",    "goes",
               "went",  "come",  "comes", "came",  "get",   "gets",  "got",
               "make",  "makes", "made",  "take",  "takes", "took",  "give",
               "gives", "gave",  "lead",  "leads", "led",   "fly",   "flies",
               "flew",  "swim",  "swims", "swam",  "run",   "runs",  "ran",
               "walk",  "walks", "ride",  "rides", "rode",  "play",  "plays",
               "jump",  "jumps", "look",  "looks"};
  lex.adjectives = {"red",    "blue",   "green",  "yellow", "black",  "white",
                    "brown",  "gray",   "grey",   "orange", "purple", "pink",
                    "big",    "small",  "large",  "little", "tall",   "short",
                    "long",   "old",    "young",  "new",    "dark",   "light",
                    "bright", "dirty",  "shiny",  "wooden", "plastic", "empty",
                    "full",   "open",   "closed", "striped", "spotted", "happy",
                    "sad",    "furry",  "fluffy", "wet",    "dry",    "hot",
                    "cold",   "warm",   "round",  "square", "leather", "left",
                    "right",  "worn",   "torn"};
  lex.nouns = {"thing",    "things",   "something", "anything", "everything",
               "nothing",
               "morning",  "evening",  "building",  "buildings", "ceiling",
               "painting", "paintings", "string",   "spring",   "wing",
               "wings",    "king",     "ring",      "earring",  "earrings",
               "clothing", "railing",  "lightning", "pudding",  "wedding",
               "bed",      "shed",     "sled"};
  lex.fillers = {"and",  "or",    "but",   "so",    "as",    "if",   "than",
                 "then", "when",  "while", "where", "who",   "whom", "whose",
                 "which", "what", "because", "although", "though", "there",
                 "here", "i",     "you",   "he",    "she",   "it",   "we",
                 "they", "me",    "him",   "them",  "us"};
  return lex;
}

}  // namespace

const Lexicons& Lexicons::builtin() {
  static const Lexicons lex = make_builtin();
  return lex;
}

std::set<std::string> load_term_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrKind::IoError, "cannot open term file: " + path);
  std::set<std::string> terms;
  std::string line;
  while (std::getline(in, line)) {
    // Trim surrounding whitespace, then skip blanks and comment lines.
    const auto first = line.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r\n");
    std::string term = line.substr(first, last - first + 1);
    if (term.empty() || term[0] == '#') continue;
    terms.insert(term);
  }
  if (terms.empty()) fail(ErrKind::FormatError, "term file has no entries: " + path);
  return terms;
}

}  // namespace negkit
