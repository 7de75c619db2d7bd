#include "negkit/merge.hpp"

#include <cmath>
#include <exception>

#include "negkit/emb_io.hpp"
#include "negkit/errors.hpp"

namespace negkit {

namespace {

void check_boost(const BoostConfig& cfg) {
  if (!std::isfinite(cfg.beta) || cfg.beta < 1.0) {
    fail(ErrKind::MalformedConfig, "beta must be finite and >= 1");
  }
}

// Cue test honoring the optional lexicon override.
bool counts_as_cue(const Token& t, const BoostConfig& cfg) {
  if (cfg.cue_lexicon_override) return cfg.cue_lexicon_override->count(t.surface) > 0;
  return t.is_cue();
}

bool phrase_negated(const ParsedCaption& parsed, const Phrase& p, const BoostConfig& cfg) {
  if (!cfg.cue_lexicon_override) return p.is_negated;
  for (std::size_t idx : p.token_indices) {
    if (counts_as_cue(parsed.tokens[idx], cfg)) return true;
  }
  return false;
}

void check_inputs(const ParsedCaption& parsed, const Matrix& embeddings) {
  if (embeddings.rows != parsed.tokens.size()) {
    fail(ErrKind::DimensionMismatch,
         "embedding rows (" + std::to_string(embeddings.rows) + ") != tokens (" +
             std::to_string(parsed.tokens.size()) + ")");
  }
  if (!embeddings.all_finite()) fail(ErrKind::NonFiniteInput, "embeddings hold NaN/Inf");
}

}  // namespace

MergedSequence merge(const ParsedCaption& parsed, const Matrix& embeddings,
                     const BoostConfig& cfg) {
  check_boost(cfg);
  check_inputs(parsed, embeddings);

  MergedSequence out;
  out.rows = Matrix(parsed.phrases.size(), embeddings.cols);
  out.spans.reserve(parsed.phrases.size());
  out.weights.reserve(parsed.phrases.size());
  out.negated.reserve(parsed.phrases.size());

  for (std::size_t p = 0; p < parsed.phrases.size(); ++p) {
    const Phrase& phrase = parsed.phrases[p];
    const bool negated = phrase_negated(parsed, phrase, cfg);

    // Raw multipliers, then one renormalization pass so the weights are an
    // exact convex combination.
    std::vector<double> gamma;
    gamma.reserve(phrase.token_indices.size());
    double total = 0.0;
    for (std::size_t idx : phrase.token_indices) {
      const double g =
          (negated && counts_as_cue(parsed.tokens[idx], cfg)) ? cfg.beta : 1.0;
      gamma.push_back(g);
      total += g;
    }
    for (double& g : gamma) g /= total;

    double* row = out.rows.row(p);
    for (std::size_t k = 0; k < phrase.token_indices.size(); ++k) {
      const double* src = embeddings.row(phrase.token_indices[k]);
      const double w = gamma[k];
      for (std::size_t c = 0; c < embeddings.cols; ++c) row[c] += w * src[c];
    }
    out.spans.push_back(phrase.token_indices);
    out.weights.push_back(std::move(gamma));
    out.negated.push_back(negated);
  }
  return out;
}

std::vector<double> mean_pool(const Matrix& rows) {
  if (rows.rows == 0) fail(ErrKind::EmptySequence, "nothing to pool");
  std::vector<double> pooled(rows.cols, 0.0);
  for (std::size_t r = 0; r < rows.rows; ++r) {
    const double* row = rows.row(r);
    for (std::size_t c = 0; c < rows.cols; ++c) pooled[c] += row[c];
  }
  for (double& v : pooled) v /= static_cast<double>(rows.rows);
  return pooled;
}

std::vector<double> mean_pool(const MergedSequence& merged) { return mean_pool(merged.rows); }

AmplificationReport amplification_check(const ParsedCaption& parsed,
                                        const Matrix& embeddings,
                                        const std::vector<double>& probe,
                                        const BoostConfig& cfg) {
  check_boost(cfg);
  check_inputs(parsed, embeddings);
  if (probe.size() != embeddings.cols) {
    fail(ErrKind::DimensionMismatch, "probe length != embedding dim");
  }
  for (double v : probe) {
    if (!std::isfinite(v)) fail(ErrKind::NonFiniteInput, "probe holds NaN/Inf");
  }

  const Phrase* negated = nullptr;
  for (const Phrase& p : parsed.phrases) {
    if (!phrase_negated(parsed, p, cfg)) continue;
    if (negated) fail(ErrKind::MultipleCues, "caption has more than one negated phrase");
    negated = &p;
  }
  if (!negated) fail(ErrKind::NoCue, "caption has no negated phrase");

  // First cue token of the phrase anchors the bound; any further cue tokens
  // are treated like content terms.
  std::size_t cue_idx = parsed.tokens.size();
  for (std::size_t idx : negated->token_indices) {
    if (counts_as_cue(parsed.tokens[idx], cfg)) {
      cue_idx = idx;
      break;
    }
  }

  AmplificationReport report;
  report.beta = cfg.beta;
  report.n = parsed.tokens.size();
  report.m = parsed.phrases.size();

  const double cue_dot = row_dot(embeddings, cue_idx, probe);
  if (cue_dot <= 0.0) fail(ErrKind::ZeroAlignment, "probe does not align with the cue token");

  double rest = 0.0;
  for (std::size_t idx : negated->token_indices) {
    if (idx == cue_idx) continue;
    rest += row_dot(embeddings, idx, probe);
  }

  const double n = static_cast<double>(report.n);
  const double m = static_cast<double>(report.m);
  report.s_single = cue_dot / n;
  report.s_merge = (cfg.beta * cue_dot + rest) / ((cfg.beta + 1.0) * m);
  report.bound_factor = (cfg.beta / (cfg.beta + 1.0)) * (n / m);
  report.holds = report.s_merge / report.s_single >= report.bound_factor - 1e-9;
  return report;
}

std::vector<MergedSequence> merge_batch(const std::vector<ParsedCaption>& parsed,
                                        const std::vector<Matrix>& embeddings,
                                        const BoostConfig& cfg, Execution exec) {
  if (parsed.size() != embeddings.size()) {
    fail(ErrKind::DimensionMismatch, "caption count != embedding matrix count");
  }
  std::vector<MergedSequence> out(parsed.size());
  std::exception_ptr first_error = nullptr;
  const long count = static_cast<long>(parsed.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (exec == Execution::Parallel)
#endif
  for (long i = 0; i < count; ++i) {
    try {
      const auto idx = static_cast<std::size_t>(i);
      out[idx] = merge(parsed[idx], embeddings[idx], cfg);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(negkit_merge_batch_error)
#endif
      if (!first_error) first_error = std::current_exception();
    }
  }
  (void)exec;
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

njson merged_to_json(const std::string& caption, const MergedSequence& merged) {
  njson j;
  j["caption"] = caption;
  j["embeddings"] = matrix_to_json_rows(merged.rows);
  j["spans"] = merged.spans;
  j["weights"] = merged.weights;
  j["negated"] = merged.negated;
  return j;
}

}  // namespace negkit
