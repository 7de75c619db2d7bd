#include "negkit/textparse.hpp"

#include <algorithm>
#include <cctype>
#include <exception>

#include "negkit/errors.hpp"

namespace negkit {

namespace {

bool is_ascii_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

bool all_punct(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), is_ascii_punct);
}

bool ends_with(const std::string& s, const char* suffix) {
  const std::size_t n = std::char_traits<char>::length(suffix);
  return s.size() >= n && s.compare(s.size() - n, n, suffix) == 0;
}

std::string lowercase_ascii(const std::string& s) {
  std::string out = s;
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

const char* to_string(WordTag tag) {
  switch (tag) {
    case WordTag::Noun: return "NOUN";
    case WordTag::Verb: return "VERB";
    case WordTag::Adj: return "ADJ";
    case WordTag::Det: return "DET";
    case WordTag::Adp: return "ADP";
    case WordTag::Neg: return "NEG";
    case WordTag::Other: return "OTHER";
  }
  return "OTHER";
}

WordTag word_tag_from_string(const std::string& name) {
  if (name == "NOUN") return WordTag::Noun;
  if (name == "VERB") return WordTag::Verb;
  if (name == "ADJ") return WordTag::Adj;
  if (name == "DET") return WordTag::Det;
  if (name == "ADP") return WordTag::Adp;
  if (name == "NEG") return WordTag::Neg;
  if (name == "OTHER") return WordTag::Other;
  fail(ErrKind::FormatError, "unknown word tag: " + name);
}

const char* to_string(CueKind kind) {
  switch (kind) {
    case CueKind::None: return "";
    case CueKind::WordCue: return "word-cue";
    case CueKind::Contraction: return "contraction";
    case CueKind::UnPrefix: return "un-prefix";
  }
  return "";
}

std::vector<Token> tokenize(const std::string& caption) {
  const std::string lowered = lowercase_ascii(caption);
  std::vector<std::string> surfaces;

  std::size_t pos = 0;
  while (pos < lowered.size()) {
    while (pos < lowered.size() &&
           std::isspace(static_cast<unsigned char>(lowered[pos]))) {
      ++pos;
    }
    if (pos >= lowered.size()) break;
    std::size_t end = pos;
    while (end < lowered.size() &&
           !std::isspace(static_cast<unsigned char>(lowered[end]))) {
      ++end;
    }
    std::string chunk = lowered.substr(pos, end - pos);
    pos = end;

    // Peel leading punctuation into standalone tokens.
    std::size_t lead = 0;
    while (lead < chunk.size() && is_ascii_punct(chunk[lead])) ++lead;
    // ... but keep a pure-punctuation chunk in one piece per character.
    for (std::size_t i = 0; i < lead; ++i) surfaces.push_back(std::string(1, chunk[i]));
    chunk.erase(0, lead);

    // Peel trailing punctuation, preserving its original order after the word.
    std::string trail;
    while (!chunk.empty() && is_ascii_punct(chunk.back()) && !ends_with(chunk, "n't")) {
      trail.insert(trail.begin(), chunk.back());
      chunk.pop_back();
    }

    if (!chunk.empty()) {
      // Split the negating clitic: "isn't" -> "is" + "n't".
      if (chunk.size() > 3 && ends_with(chunk, "n't")) {
        surfaces.push_back(chunk.substr(0, chunk.size() - 3));
        surfaces.push_back("n't");
      } else {
        surfaces.push_back(chunk);
      }
    }
    for (char c : trail) surfaces.push_back(std::string(1, c));
  }

  if (surfaces.empty()) fail(ErrKind::EmptyCaption, "caption holds no tokens");

  std::vector<Token> tokens;
  tokens.reserve(surfaces.size());
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    Token t;
    t.surface = std::move(surfaces[i]);
    t.index = i;
    tokens.push_back(std::move(t));
  }
  return tokens;
}

void detect_cues(std::vector<Token>& tokens, const Lexicons& lex) {
  for (Token& t : tokens) {
    if (all_punct(t.surface)) continue;
    if (lex.cues.count(t.surface)) {
      t.tag = WordTag::Neg;
      t.cue = t.surface == "n't" ? CueKind::Contraction : CueKind::WordCue;
      continue;
    }
    if (t.surface.rfind("un", 0) == 0 && !lex.un_exclusions.count(t.surface)) {
      const std::string stem = t.surface.substr(2);
      if (stem.size() >= 3 &&
          (lex.un_stems.count(stem) || ends_with(stem, "ed") ||
           ends_with(stem, "ing") || ends_with(stem, "able"))) {
        t.cue = CueKind::UnPrefix;  // word class assigned by tag_tokens
      }
    }
  }
}

void tag_tokens(std::vector<Token>& tokens, const Lexicons& lex) {
  for (Token& t : tokens) {
    if (t.tag == WordTag::Neg) continue;  // cue lexicon wins
    const std::string& s = t.surface;
    if (all_punct(s)) {
      t.tag = WordTag::Other;
    } else if (t.cue == CueKind::UnPrefix) {
      // Prefix-negated words act as modifiers ("unpeeled banana").
      t.tag = WordTag::Adj;
    } else if (lex.determiners.count(s)) {
      t.tag = WordTag::Det;
    } else if (lex.adpositions.count(s)) {
      t.tag = WordTag::Adp;
    } else if (lex.fillers.count(s)) {
      t.tag = WordTag::Other;
    } else if (lex.verbs.count(s)) {
      t.tag = WordTag::Verb;
    } else if (lex.adjectives.count(s)) {
      t.tag = WordTag::Adj;
    } else if (lex.nouns.count(s)) {
      t.tag = WordTag::Noun;
    } else if (ends_with(s, "ing") && s.size() > 4) {
      t.tag = WordTag::Verb;
    } else if (ends_with(s, "ed") && s.size() > 3) {
      t.tag = WordTag::Verb;
    } else {
      t.tag = WordTag::Noun;
    }
  }
}

std::vector<Phrase> chunk(const std::vector<Token>& tokens) {
  const std::size_t n = tokens.size();
  std::vector<Phrase> phrases;

  auto emit = [&](std::size_t begin, std::size_t end, std::size_t head) {
    Phrase p;
    for (std::size_t i = begin; i < end; ++i) {
      p.token_indices.push_back(i);
      if (tokens[i].is_cue()) p.is_negated = true;
    }
    p.head_index = head;
    phrases.push_back(std::move(p));
  };

  std::size_t i = 0;
  while (i < n) {
    const WordTag t = tokens[i].tag;
    if (t == WordTag::Neg) {
      std::size_t j = i + 1;
      while (j < n && (tokens[j].tag == WordTag::Det || tokens[j].tag == WordTag::Adp ||
                       tokens[j].tag == WordTag::Adj)) {
        ++j;
      }
      if (j < n && tokens[j].tag == WordTag::Noun) {
        std::size_t k = j;
        while (k < n && tokens[k].tag == WordTag::Noun) ++k;
        emit(i, k, k - 1);
        i = k;
      } else if (j < n && tokens[j].tag == WordTag::Verb) {
        emit(i, j + 1, j);
        i = j + 1;
      } else if (j > i + 1 && tokens[j - 1].tag == WordTag::Adj) {
        // Modifier run ended without a noun/verb: its last adjective is the
        // content ("not red").
        emit(i, j, j - 1);
        i = j;
      } else {
        // No content reachable (caption-final cue, or blocked): the cue
        // stands alone as a negated singleton.
        emit(i, i + 1, i);
        ++i;
      }
    } else if (t == WordTag::Det || t == WordTag::Adj || t == WordTag::Noun) {
      std::size_t j = i;
      if (tokens[j].tag == WordTag::Det) ++j;
      while (j < n && tokens[j].tag == WordTag::Adj) ++j;
      std::size_t k = j;
      while (k < n && tokens[k].tag == WordTag::Noun) ++k;
      if (k > j) {
        emit(i, k, k - 1);
        i = k;
      } else {
        emit(i, i + 1, i);
        ++i;
      }
    } else if (t == WordTag::Verb) {
      std::size_t k = i;
      while (k < n && tokens[k].tag == WordTag::Verb) ++k;
      emit(i, k, k - 1);
      i = k;
    } else {
      emit(i, i + 1, i);
      ++i;
    }
  }
  return phrases;
}

ParsedCaption parse_caption(const std::string& caption, const Lexicons& lex) {
  ParsedCaption parsed;
  parsed.raw = caption;
  parsed.tokens = tokenize(caption);
  detect_cues(parsed.tokens, lex);
  tag_tokens(parsed.tokens, lex);
  parsed.phrases = chunk(parsed.tokens);
  return parsed;
}

std::vector<ParsedCaption> parse_batch(const std::vector<std::string>& captions,
                                       const Lexicons& lex, Execution exec) {
  std::vector<ParsedCaption> out(captions.size());
  std::exception_ptr first_error = nullptr;
  const long count = static_cast<long>(captions.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (exec == Execution::Parallel)
#endif
  for (long idx = 0; idx < count; ++idx) {
    try {
      out[static_cast<std::size_t>(idx)] =
          parse_caption(captions[static_cast<std::size_t>(idx)], lex);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(negkit_parse_batch_error)
#endif
      if (!first_error) first_error = std::current_exception();
    }
  }
  (void)exec;
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

njson parsed_to_json(const ParsedCaption& parsed) {
  njson tokens = njson::array();
  for (const Token& t : parsed.tokens) {
    njson tok;
    tok["surface"] = t.surface;
    tok["tag"] = to_string(t.tag);
    tok["cue_kind"] = t.cue == CueKind::None ? njson(nullptr) : njson(to_string(t.cue));
    tokens.push_back(std::move(tok));
  }
  njson phrases = njson::array();
  for (const Phrase& p : parsed.phrases) {
    njson ph;
    ph["indices"] = p.token_indices;
    ph["is_negated"] = p.is_negated;
    phrases.push_back(std::move(ph));
  }
  return njson{{"raw", parsed.raw}, {"tokens", tokens}, {"phrases", phrases}};
}

ParsedCaption parsed_from_json(const njson& j) {
  if (!j.is_object() || !j.contains("raw") || !j.contains("tokens") || !j.contains("phrases")) {
    fail(ErrKind::FormatError, "parsed caption object needs raw/tokens/phrases");
  }
  ParsedCaption parsed;
  try {
    parsed.raw = j.at("raw").get<std::string>();
    std::size_t index = 0;
    for (const njson& tok : j.at("tokens")) {
      Token t;
      t.surface = tok.at("surface").get<std::string>();
      t.tag = word_tag_from_string(tok.at("tag").get<std::string>());
      t.index = index++;
      if (tok.contains("cue_kind") && !tok.at("cue_kind").is_null()) {
        const std::string kind = tok.at("cue_kind").get<std::string>();
        if (kind == "word-cue") t.cue = CueKind::WordCue;
        else if (kind == "contraction") t.cue = CueKind::Contraction;
        else if (kind == "un-prefix") t.cue = CueKind::UnPrefix;
        else fail(ErrKind::FormatError, "unknown cue kind: " + kind);
      }
      parsed.tokens.push_back(std::move(t));
    }
    for (const njson& ph : j.at("phrases")) {
      Phrase p;
      p.token_indices = ph.at("indices").get<std::vector<std::size_t>>();
      p.is_negated = ph.at("is_negated").get<bool>();
      if (p.token_indices.empty()) fail(ErrKind::FormatError, "phrase with no tokens");
      p.head_index = p.token_indices.back();
      parsed.phrases.push_back(std::move(p));
    }
  } catch (const njson::exception& e) {
    fail(ErrKind::FormatError, std::string("bad parsed caption: ") + e.what());
  }
  // The phrases must form an ordered partition of the tokens.
  std::size_t expect = 0;
  for (const Phrase& p : parsed.phrases) {
    for (std::size_t idx : p.token_indices) {
      if (idx != expect++) fail(ErrKind::FormatError, "phrases do not partition the tokens");
    }
  }
  if (expect != parsed.tokens.size()) {
    fail(ErrKind::FormatError, "phrases do not cover every token");
  }
  return parsed;
}

}  // namespace negkit
