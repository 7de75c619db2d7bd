#pragma once

// Independent reference implementations used to cross-check the library.
// Everything here is deliberately written the slow, obvious way (explicit
// loops, rational pixel counting, recursive grammar matching) and must not
// call into the code paths it checks.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "negkit/detections.hpp"
#include "negkit/geometry.hpp"
#include "negkit/matrix.hpp"
#include "negkit/textparse.hpp"

namespace oracle {

// --- text ------------------------------------------------------------------

// Reference chunker: recursive-descent match of the pinned phrase grammar
//   negated  := NEG (DET|ADP|ADJ)* (NOUN+ | VERB | ADJ-backtrack)
//   noun     := DET? ADJ* NOUN+
//   verb     := VERB+
//   other    := any single token
// over a caption given per-token (tag, is_cue) pairs.  Returns the phrase
// partition as index lists plus a negation flag per phrase.
struct RefPhrase {
  std::vector<std::size_t> indices;
  bool negated = false;
};
std::vector<RefPhrase> ref_chunk(const std::vector<negkit::WordTag>& tags,
                                 const std::vector<bool>& cue);

// Independent whitespace/punctuation token counter (no Token machinery):
// counts the tokens the library tokenizer should produce for a caption.
std::size_t ref_token_count(const std::string& caption);

// Independent cue-token counter over a caption: word cues and "n't" splits
// from a fixed list plus the un- prefix rule, re-implemented directly on the
// raw text.
std::size_t ref_cue_count(const std::string& caption);

// --- merge -----------------------------------------------------------------

// Brute-force merged rows: per phrase, explicit gamma weights renormalized by
// their sum, accumulated column by column.
negkit::Matrix ref_merge_rows(const negkit::ParsedCaption& parsed,
                              const negkit::Matrix& embeddings, double beta);

// Amplification quantities straight from raw dot products: the caption's
// token dots with the probe, the cue position, and the phrase layout.
struct RefAmplification {
  double s_single = 0.0;
  double s_merge = 0.0;
  double bound_factor = 0.0;
};
RefAmplification ref_amplification(const std::vector<double>& token_dots,
                                   std::size_t cue_index,
                                   const std::vector<std::size_t>& cue_phrase,
                                   std::size_t phrase_count, double beta);

// --- geometry / detections -------------------------------------------------

// IoU by unit-pixel counting; boxes must have integer coordinates.
double ref_iou_pixels(const negkit::Box& a, const negkit::Box& b);

// O(n^2) suppression: walk candidates in (score desc, caption_id asc, input
// order) and keep those not overlapped above the threshold by a kept box.
std::vector<negkit::Detection> ref_nms(const std::vector<negkit::Detection>& dets,
                                       double iou_thresh);

// Independent per-query evaluation over explicit matching loops.
struct RefEval {
  double ap = 0.0;      // 0-100, mean over positive queries and thresholds
  double recall = 0.0;  // same scaling
  double precision_pooled = 0.0;  // 0-1 at the base threshold
  double recall_pooled = 0.0;
};
RefEval ref_evaluate(const std::vector<negkit::Detection>& dets,
                     const negkit::QuerySet& qs, const std::vector<double>& thresholds,
                     double base_thresh, int max_dets_per_image);

// Share of empty-ground-truth queries with any detection scoring >= tau.
double ref_fpr(const std::vector<negkit::Detection>& dets, const negkit::QuerySet& qs,
               double tau);

// Plain linear scan: first index achieving the maximum.
std::size_t ref_argmax(const std::vector<double>& scores);

// Reading order (y1, then x1, then input order) as an index permutation.
std::vector<std::size_t> ref_reading_order(const std::vector<negkit::Box>& boxes);

}  // namespace oracle
