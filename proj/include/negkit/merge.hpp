#pragma once

// Phrase-level embedding merge with negation boosting.  Each phrase from the
// chunker collapses to one row: a convex combination of its token embeddings
// where cue tokens in negated phrases carry weight beta (>= 1) and everything
// else weight 1, renormalized to sum to 1.  With beta = 1 every row is the
// plain phrase mean.  A merged caption therefore shrinks from n token rows
// to m phrase rows (m < n whenever any phrase spans more than one token),
// which concentrates the pooled representation on the cue-bearing content.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "negkit/execution.hpp"
#include "negkit/json.hpp"
#include "negkit/matrix.hpp"
#include "negkit/textparse.hpp"

namespace negkit {

struct BoostConfig {
  // Weight multiplier for cue tokens inside negated phrases.  Must be finite
  // and >= 1; 1 disables the boost.
  double beta = 2.0;
  // When set, replaces the cue test used for weighting: a token counts as a
  // cue iff its surface is in this set (the prefix rule is not re-run).
  // Phrase negation flags are re-derived accordingly.
  std::optional<std::set<std::string>> cue_lexicon_override;
};

struct MergedSequence {
  Matrix rows;                                  // m x d, one row per phrase
  std::vector<std::vector<std::size_t>> spans;  // source token indices per row
  std::vector<std::vector<double>> weights;     // convex weights, same arity
  std::vector<bool> negated;                    // row came from a negated phrase
};

// Throws DimensionMismatch when the embedding row count differs from the
// token count, NonFiniteInput on NaN/Inf entries, MalformedConfig on a bad
// beta.  Every weight vector sums to 1 within 1e-6 by construction.
MergedSequence merge(const ParsedCaption& parsed, const Matrix& embeddings,
                     const BoostConfig& cfg = {});

// Column means; EmptySequence when there are no rows.
std::vector<double> mean_pool(const Matrix& rows);
std::vector<double> mean_pool(const MergedSequence& merged);

// Score-concentration diagnostic for a caption with exactly one negated
// phrase.  With the caption's n token embeddings pooled uniformly, a probe v
// aligned with the cue row h_c scores s_single = <v,h_c>/n.  After merging
// to m rows the negated phrase contributes
//
//   s_merge = (beta*<v,h_c> + sum over non-cue phrase tokens of <v,h_j>)
//             / ((beta+1) * m)
//
// (the two-token cue+content normalizer, applied uniformly).  Whenever
// <v,h_c> > 0 and every non-cue phrase token has <v,h_j> >= 0,
//
//   s_merge / s_single >= (beta/(beta+1)) * (n/m) = bound_factor.
//
// Throws NoCue / MultipleCues when the caption does not have exactly one
// negated phrase, ZeroAlignment when <v,h_c> <= 0.  With several cue tokens
// in the phrase, the first one is h_c and the rest count as non-cue terms.
struct AmplificationReport {
  double s_single = 0.0;
  double s_merge = 0.0;
  double bound_factor = 0.0;
  double beta = 0.0;
  std::size_t n = 0;  // token count
  std::size_t m = 0;  // phrase count
  bool holds = false; // s_merge/s_single >= bound_factor - 1e-9
};
AmplificationReport amplification_check(const ParsedCaption& parsed,
                                        const Matrix& embeddings,
                                        const std::vector<double>& probe,
                                        const BoostConfig& cfg = {});

// Batch driver over per-caption embedding matrices; Serial and Parallel
// produce identical output.
std::vector<MergedSequence> merge_batch(const std::vector<ParsedCaption>& parsed,
                                        const std::vector<Matrix>& embeddings,
                                        const BoostConfig& cfg, Execution exec);

// Wire format for the CLI: {"caption", "embeddings", "spans", "weights",
// "negated"}.
njson merged_to_json(const std::string& caption, const MergedSequence& merged);

}  // namespace negkit
