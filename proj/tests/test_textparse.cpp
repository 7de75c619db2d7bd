#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "negkit/errors.hpp"
#include "negkit/lexicon.hpp"
#include "negkit/rng.hpp"
#include "negkit/textparse.hpp"
#include "oracles.hpp"

using namespace negkit;

namespace {

template <typename F>
std::optional<ErrKind> thrown_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

std::vector<std::string> surfaces(const std::string& caption) {
  std::vector<std::string> out;
  for (const Token& t : tokenize(caption)) out.push_back(t.surface);
  return out;
}

ParsedCaption parse(const std::string& caption) { return parse_caption(caption); }

std::vector<std::vector<std::size_t>> spans(const ParsedCaption& parsed) {
  std::vector<std::vector<std::size_t>> out;
  for (const Phrase& p : parsed.phrases) out.push_back(p.token_indices);
  return out;
}

std::vector<bool> negation_flags(const ParsedCaption& parsed) {
  std::vector<bool> out;
  for (const Phrase& p : parsed.phrases) out.push_back(p.is_negated);
  return out;
}

}  // namespace

TEST_CASE("tokenizer lowercases, splits whitespace, and peels punctuation") {
  CHECK(surfaces("A man without a hat") ==
        std::vector<std::string>{"a", "man", "without", "a", "hat"});
  CHECK(surfaces("Hello, world!") == std::vector<std::string>{"hello", ",", "world", "!"});
  CHECK(surfaces("well-known trick") == std::vector<std::string>{"well-known", "trick"});
  CHECK(surfaces("\"quoted\"") == std::vector<std::string>{"\"", "quoted", "\""});
  CHECK(surfaces("dots... here") == std::vector<std::string>{"dots", ".", ".", ".", "here"});
}

TEST_CASE("tokenizer splits the n't clitic off long-enough words") {
  CHECK(surfaces("The man isn't smiling.") ==
        std::vector<std::string>{"the", "man", "is", "n't", "smiling", "."});
  CHECK(surfaces("don't stop") == std::vector<std::string>{"do", "n't", "stop"});
  CHECK(surfaces("isn't.") == std::vector<std::string>{"is", "n't", "."});
  // Bare "n't" is too short to split further.
  CHECK(surfaces("n't") == std::vector<std::string>{"n't"});
}

TEST_CASE("blank captions are rejected") {
  CHECK(thrown_kind([] { tokenize(""); }) == ErrKind::EmptyCaption);
  CHECK(thrown_kind([] { tokenize("   \t  "); }) == ErrKind::EmptyCaption);
}

TEST_CASE("cue detection: word cues, contraction, un- prefix") {
  ParsedCaption p = parse("no not never without none neither nor");
  for (const Token& t : p.tokens) {
    CAPTURE(t.surface);
    CHECK(t.cue == CueKind::WordCue);
    CHECK(t.tag == WordTag::Neg);
  }

  p = parse("it isn't here");
  REQUIRE(p.tokens.size() == 4);
  CHECK(p.tokens[2].surface == "n't");
  CHECK(p.tokens[2].cue == CueKind::Contraction);
  CHECK(p.tokens[2].tag == WordTag::Neg);

  p = parse("unpeeled unhappy unlikely unreadable unstable");
  for (const Token& t : p.tokens) {
    CAPTURE(t.surface);
    CHECK(t.cue == CueKind::UnPrefix);
    CHECK(t.tag == WordTag::Adj);  // prefix-negated words act as modifiers
  }

  p = parse("under union uniform until unit uncle universe");
  for (const Token& t : p.tokens) {
    CAPTURE(t.surface);
    CHECK(t.cue == CueKind::None);
  }
}

TEST_CASE("word-class assignment follows lexicons then suffix rules") {
  const ParsedCaption p = parse("the small man is smiling near a painted building , there");
  REQUIRE(p.tokens.size() == 12);
  CHECK(p.tokens[0].tag == WordTag::Det);    // the
  CHECK(p.tokens[1].tag == WordTag::Adj);    // small
  CHECK(p.tokens[2].tag == WordTag::Noun);   // man (default)
  CHECK(p.tokens[3].tag == WordTag::Verb);   // is
  CHECK(p.tokens[4].tag == WordTag::Verb);   // smiling (-ing)
  CHECK(p.tokens[5].tag == WordTag::Adp);    // near
  CHECK(p.tokens[6].tag == WordTag::Det);    // a
  CHECK(p.tokens[7].tag == WordTag::Verb);   // painted (-ed)
  CHECK(p.tokens[8].tag == WordTag::Noun);   // building (noun lexicon beats -ing)
  CHECK(p.tokens[9].tag == WordTag::Other);  // ,
  CHECK(p.tokens[10].tag == WordTag::Other); // there (filler)
}

TEST_CASE("chunker frozen examples") {
  ParsedCaption p = parse("A man without a hat");
  CHECK(spans(p) == std::vector<std::vector<std::size_t>>{{0, 1}, {2, 3, 4}});
  CHECK(negation_flags(p) == std::vector<bool>{false, true});

  p = parse("The man isn't smiling");
  CHECK(spans(p) == std::vector<std::vector<std::size_t>>{{0, 1}, {2}, {3, 4}});
  CHECK(negation_flags(p) == std::vector<bool>{false, false, true});

  // Caption-final cue stands alone as a negated singleton.
  p = parse("there is no");
  CHECK(spans(p) == std::vector<std::vector<std::size_t>>{{0}, {1}, {2}});
  CHECK(negation_flags(p) == std::vector<bool>{false, false, true});

  // Modifier run with no noun/verb: the trailing adjective is the content.
  p = parse("not red");
  CHECK(spans(p) == std::vector<std::vector<std::size_t>>{{0, 1}});
  CHECK(negation_flags(p) == std::vector<bool>{true});

  // A prefix-negated adjective marks its noun phrase as negated.
  p = parse("an unpeeled banana");
  CHECK(spans(p) == std::vector<std::vector<std::size_t>>{{0, 1, 2}});
  CHECK(negation_flags(p) == std::vector<bool>{true});

  p = parse("no dogs and no cats");
  CHECK(spans(p) == std::vector<std::vector<std::size_t>>{{0, 1}, {2}, {3, 4}});
  CHECK(negation_flags(p) == std::vector<bool>{true, false, true});
}

namespace {

// Builds a synthetic token row for the chunker without running the taggers.
std::vector<Token> synthetic_tokens(const std::vector<WordTag>& tags) {
  std::vector<Token> tokens;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    Token t;
    t.surface = "w" + std::to_string(i);
    t.index = i;
    t.tag = tags[i];
    if (tags[i] == WordTag::Neg) t.cue = CueKind::WordCue;
    tokens.push_back(std::move(t));
  }
  return tokens;
}

}  // namespace

TEST_CASE("chunker matches the reference grammar on every tag sequence up to length 6") {
  const WordTag all[] = {WordTag::Noun, WordTag::Verb, WordTag::Adj, WordTag::Det,
                         WordTag::Adp,  WordTag::Neg,  WordTag::Other};
  std::size_t mismatches = 0;
  std::string first_failure;

  for (std::size_t len = 1; len <= 6 && mismatches == 0; ++len) {
    std::size_t combos = 1;
    for (std::size_t i = 0; i < len; ++i) combos *= 7;
    for (std::size_t code = 0; code < combos; ++code) {
      std::vector<WordTag> tags;
      std::vector<bool> cue;
      std::size_t rest = code;
      for (std::size_t i = 0; i < len; ++i) {
        tags.push_back(all[rest % 7]);
        cue.push_back(tags.back() == WordTag::Neg);
        rest /= 7;
      }

      const std::vector<Phrase> got = chunk(synthetic_tokens(tags));
      const std::vector<oracle::RefPhrase> want = oracle::ref_chunk(tags, cue);

      bool same = got.size() == want.size();
      std::size_t covered = 0;
      for (std::size_t p = 0; same && p < got.size(); ++p) {
        same = got[p].token_indices == want[p].indices &&
               got[p].is_negated == want[p].negated;
        covered += got[p].token_indices.size();
      }
      if (!same || covered != len) {
        ++mismatches;
        if (first_failure.empty()) {
          for (WordTag t : tags) first_failure += std::string(to_string(t)) + " ";
        }
        break;
      }
    }
  }
  CAPTURE(first_failure);
  CHECK(mismatches == 0);
}

TEST_CASE("generated captions: partition holds and cues bind their noun") {
  const std::vector<std::string> dets = {"a", "the", "his"};
  const std::vector<std::string> adjs = {"red", "small", "wooden"};
  const std::vector<std::string> nouns = {"man", "hat", "dog", "chair"};
  const std::vector<std::string> verbs = {"holds", "wears"};
  const std::vector<std::string> cues = {"no", "without", "not"};

  Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    std::string caption = dets[rng.below(dets.size())];
    const std::size_t lead_adjs = rng.below(3);
    for (std::size_t i = 0; i < lead_adjs; ++i) {
      caption += " " + adjs[rng.below(adjs.size())];
    }
    caption += " " + nouns[rng.below(nouns.size())];
    caption += " " + verbs[rng.below(verbs.size())];
    caption += " " + cues[rng.below(cues.size())];
    if (rng.below(2) == 0) caption += " " + dets[rng.below(dets.size())];
    const std::size_t tail_adjs = rng.below(3);
    for (std::size_t i = 0; i < tail_adjs; ++i) {
      caption += " " + adjs[rng.below(adjs.size())];
    }
    caption += " " + nouns[rng.below(nouns.size())];

    CAPTURE(caption);
    const ParsedCaption p = parse(caption);

    // Ordered partition of all token indices.
    std::vector<std::size_t> flat;
    for (const Phrase& phrase : p.phrases) {
      flat.insert(flat.end(), phrase.token_indices.begin(), phrase.token_indices.end());
    }
    REQUIRE(flat.size() == p.tokens.size());
    for (std::size_t i = 0; i < flat.size(); ++i) REQUIRE(flat[i] == i);

    // The cue shares a phrase with the trailing noun, and that phrase is
    // flagged negated.
    const std::size_t cue_index = p.tokens.size() - 2 - tail_adjs -
                                  (caption.find(" a ", caption.find(cues[0])) ? 0 : 0);
    (void)cue_index;
    const std::size_t last = p.tokens.size() - 1;
    bool found = false;
    for (const Phrase& phrase : p.phrases) {
      bool has_cue = false;
      bool has_last = false;
      for (std::size_t idx : phrase.token_indices) {
        if (p.tokens[idx].is_cue()) has_cue = true;
        if (idx == last) has_last = true;
      }
      if (has_cue) {
        REQUIRE(has_last);
        REQUIRE(phrase.is_negated);
        found = true;
      }
    }
    REQUIRE(found);
  }
}

TEST_CASE("token counts and cue counts match the independent counters") {
  const std::vector<std::string> captions = {
      "A man without a hat",
      "The dog isn't running, and there's no ball!",
      "an unpeeled banana near the united uniform",
      "Nothing here... nothing at all",
      "don't stop; never slow down",
  };
  for (const std::string& caption : captions) {
    CAPTURE(caption);
    const ParsedCaption p = parse(caption);
    std::size_t cue_tokens = 0;
    for (const Token& t : p.tokens) {
      if (t.is_cue()) ++cue_tokens;
    }
    CHECK(p.tokens.size() == oracle::ref_token_count(caption));
    CHECK(cue_tokens == oracle::ref_cue_count(caption));
  }
}

TEST_CASE("parsed captions survive a JSON round trip") {
  const std::vector<std::string> captions = {
      "A man without a hat",
      "the small dog isn't running",
      "an unpeeled banana",
      "Hello, world!",
  };
  for (const std::string& caption : captions) {
    const ParsedCaption p = parse(caption);
    const njson j = parsed_to_json(p);
    const ParsedCaption q = parsed_from_json(j);
    CHECK(parsed_to_json(q).dump() == j.dump());
  }
}

TEST_CASE("parsed-caption JSON validation rejects broken input") {
  const njson good = parsed_to_json(parse("a man without a hat"));

  njson overlap = good;
  overlap["phrases"][1]["indices"] = njson::array({0, 1});  // reuses covered tokens
  CHECK(thrown_kind([&] { parsed_from_json(overlap); }) == ErrKind::FormatError);

  njson bad_tag = good;
  bad_tag["tokens"][0]["tag"] = "BANANA";
  CHECK(thrown_kind([&] { parsed_from_json(bad_tag); }) == ErrKind::FormatError);

  njson missing = good;
  missing.erase("tokens");
  CHECK(thrown_kind([&] { parsed_from_json(missing); }) == ErrKind::FormatError);
}

TEST_CASE("term files load with comments and fail loudly otherwise") {
  const std::string path = "/tmp/negkit_terms_test.txt";
  {
    std::ofstream out(path);
    out << "# cue list\n\n  no  \nnot\nwithout\n";
  }
  const std::set<std::string> terms = load_term_file(path);
  CHECK(terms == std::set<std::string>{"no", "not", "without"});
  std::remove(path.c_str());

  CHECK(thrown_kind([] { load_term_file("/tmp/negkit_missing_terms.txt"); }) ==
        ErrKind::IoError);

  const std::string empty_path = "/tmp/negkit_terms_empty.txt";
  {
    std::ofstream out(empty_path);
    out << "# only a comment\n";
  }
  CHECK(thrown_kind([&] { load_term_file(empty_path); }) == ErrKind::FormatError);
  std::remove(empty_path.c_str());
}
