#include "negkit/adapter.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>

#include "negkit/emb_io.hpp"
#include "negkit/errors.hpp"
#include "negkit/rng.hpp"

namespace negkit {

namespace {

void check_layer(const LoraLinear& layer) {
  const std::size_t d = layer.W.rows;
  const std::size_t r = layer.A.rows;
  if (d == 0 || r == 0 || layer.W.cols != d || layer.A.cols != d ||
      layer.B.rows != d || layer.B.cols != r) {
    fail(ErrKind::ShapeMismatch, "adapter shapes inconsistent (want W dxd, A rxd, B dxr)");
  }
  if (!std::isfinite(layer.alpha) || layer.alpha <= 0.0) {
    fail(ErrKind::MalformedConfig, "alpha must be finite and > 0");
  }
}

}  // namespace

LoraLinear make_lora(std::size_t d, std::size_t r, double alpha, std::uint64_t seed) {
  if (d == 0 || r == 0) fail(ErrKind::ShapeMismatch, "adapter extents must be positive");
  if (!std::isfinite(alpha) || alpha <= 0.0) {
    fail(ErrKind::MalformedConfig, "alpha must be finite and > 0");
  }
  LoraLinear layer;
  layer.alpha = alpha;
  layer.W = Matrix(d, d);
  layer.A = Matrix(r, d);
  layer.B = Matrix(d, r);  // zero: a fresh adapter contributes nothing
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  Rng rng(seed);
  for (double& v : layer.W.data) v = rng.uniform(-scale, scale);
  for (double& v : layer.A.data) v = rng.uniform(-scale, scale);
  return layer;
}

std::vector<double> lora_forward(const LoraLinear& layer, const std::vector<double>& x) {
  check_layer(layer);
  if (x.size() != layer.dim()) fail(ErrKind::ShapeMismatch, "input length != adapter dim");

  std::vector<double> y = matvec(layer.W, x);
  std::vector<double> gate = matvec(layer.A, x);
  for (double& z : gate) z = z > 0.0 ? z : 0.0;
  const std::vector<double> delta = matvec(layer.B, gate);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += layer.alpha * delta[i];
  return y;
}

LoraGrads lora_backward(const LoraLinear& layer, const std::vector<double>& x,
                        const std::vector<double>& upstream) {
  check_layer(layer);
  const std::size_t d = layer.dim();
  const std::size_t r = layer.rank();
  if (x.size() != d) fail(ErrKind::ShapeMismatch, "input length != adapter dim");
  if (upstream.size() != d) fail(ErrKind::ShapeMismatch, "upstream length != adapter dim");

  const std::vector<double> z = matvec(layer.A, x);
  std::vector<double> gate(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) gate[j] = z[j] > 0.0 ? z[j] : 0.0;

  LoraGrads grads;
  grads.dB = Matrix(d, r);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      grads.dB.at(i, j) = layer.alpha * upstream[i] * gate[j];
    }
  }

  // B^T g, then gate by the relu derivative (0 at the kink itself).
  std::vector<double> bt_g(r, 0.0);
  for (std::size_t j = 0; j < r; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) acc += layer.B.at(i, j) * upstream[i];
    bt_g[j] = acc;
  }
  grads.dA = Matrix(r, d);
  for (std::size_t j = 0; j < r; ++j) {
    const double s = z[j] > 0.0 ? layer.alpha * bt_g[j] : 0.0;
    for (std::size_t k = 0; k < d; ++k) grads.dA.at(j, k) = s * x[k];
  }
  return grads;
}

Matrix forward_batch(const LoraLinear& layer, const Matrix& inputs, Execution exec) {
  check_layer(layer);
  if (inputs.cols != layer.dim()) fail(ErrKind::ShapeMismatch, "batch width != adapter dim");
  Matrix out(inputs.rows, inputs.cols);
  std::exception_ptr first_error = nullptr;
  const long count = static_cast<long>(inputs.rows);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (exec == Execution::Parallel)
#endif
  for (long i = 0; i < count; ++i) {
    try {
      const auto row = static_cast<std::size_t>(i);
      std::vector<double> x(inputs.row(row), inputs.row(row) + inputs.cols);
      const std::vector<double> y = lora_forward(layer, x);
      std::copy(y.begin(), y.end(), out.row(row));
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(negkit_forward_batch_error)
#endif
      if (!first_error) first_error = std::current_exception();
    }
  }
  (void)exec;
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

PlacementScheme placement_from_string(const std::string& name) {
  if (name == "shallow") return PlacementScheme::Shallow;
  if (name == "strided") return PlacementScheme::Strided;
  if (name == "deep") return PlacementScheme::Deep;
  fail(ErrKind::UnknownScheme, "unknown placement scheme: " + name);
}

std::vector<int> placement(PlacementScheme scheme, int num_blocks) {
  if (num_blocks < 6) fail(ErrKind::ShapeMismatch, "placement assumes at least 6 blocks");
  switch (scheme) {
    case PlacementScheme::Shallow: return {0, 1, 2};
    case PlacementScheme::Strided: return {1, 3, 5};
    case PlacementScheme::Deep: return {3, 4, 5};
  }
  fail(ErrKind::UnknownScheme, "unhandled placement scheme");
}

AttentionDiagnostics attention_by_class(const std::vector<Matrix>& blocks,
                                        const std::vector<WordTag>& classes) {
  if (blocks.empty()) fail(ErrKind::ShapeMismatch, "no attention blocks given");
  if (classes.empty()) fail(ErrKind::ShapeMismatch, "no token classes given");

  AttentionDiagnostics diag;
  std::map<std::string, double> total_sum;
  std::map<std::string, std::size_t> total_count;

  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const Matrix& attn = blocks[b];
    if (attn.cols != classes.size()) {
      fail(ErrKind::ShapeMismatch, "attention columns != class list length");
    }
    if (attn.rows == 0) fail(ErrKind::ShapeMismatch, "attention block with no rows");
    std::map<std::string, double> block_sum;
    std::map<std::string, std::size_t> block_count;
    for (std::size_t q = 0; q < attn.rows; ++q) {
      double row_total = 0.0;
      for (std::size_t t = 0; t < attn.cols; ++t) {
        const double v = attn.at(q, t);
        if (!std::isfinite(v) || v < 0.0) {
          fail(ErrKind::RowNotNormalized, "attention entries must be finite and >= 0");
        }
        row_total += v;
      }
      if (std::abs(row_total - 1.0) > 1e-4) {
        fail(ErrKind::RowNotNormalized, "attention row does not sum to 1");
      }
      for (std::size_t t = 0; t < attn.cols; ++t) {
        const std::string key = to_string(classes[t]);
        block_sum[key] += attn.at(q, t);
        block_count[key] += 1;
        total_sum[key] += attn.at(q, t);
        total_count[key] += 1;
      }
    }
    std::map<std::string, double> block_mean;
    for (const auto& [key, sum] : block_sum) {
      block_mean[key] = sum / static_cast<double>(block_count[key]);
    }
    diag.per_block.push_back(std::move(block_mean));
  }
  for (const auto& [key, sum] : total_sum) {
    diag.per_class[key] = sum / static_cast<double>(total_count[key]);
  }
  return diag;
}

njson attention_to_json(const AttentionDiagnostics& diag) {
  njson j;
  j["per_class"] = diag.per_class;
  j["per_block"] = diag.per_block;
  return j;
}

void save_checkpoint(const LoraLinear& layer, const std::string& path) {
  check_layer(layer);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrKind::IoError, "cannot create checkpoint: " + path);
  njson header;
  header["d"] = layer.dim();
  header["r"] = layer.rank();
  header["alpha"] = layer.alpha;
  out << header.dump() << "\n";
  write_emb_block(out, layer.W);
  write_emb_block(out, layer.A);
  write_emb_block(out, layer.B);
  if (!out) fail(ErrKind::IoError, "checkpoint write failed: " + path);
}

LoraLinear load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrKind::IoError, "cannot open checkpoint: " + path);
  std::string header_line;
  if (!std::getline(in, header_line)) fail(ErrKind::FormatError, "checkpoint missing header");
  njson header;
  try {
    header = njson::parse(header_line);
  } catch (const njson::exception& e) {
    fail(ErrKind::FormatError, std::string("bad checkpoint header: ") + e.what());
  }
  LoraLinear layer;
  std::size_t d = 0;
  std::size_t r = 0;
  try {
    d = header.at("d").get<std::size_t>();
    r = header.at("r").get<std::size_t>();
    layer.alpha = header.at("alpha").get<double>();
  } catch (const njson::exception& e) {
    fail(ErrKind::FormatError, std::string("bad checkpoint header: ") + e.what());
  }
  layer.W = read_emb_block(in);
  layer.A = read_emb_block(in);
  layer.B = read_emb_block(in);
  if (layer.W.rows != d || layer.W.cols != d || layer.A.rows != r || layer.A.cols != d ||
      layer.B.rows != d || layer.B.cols != r) {
    fail(ErrKind::FormatError, "checkpoint blocks do not match header extents");
  }
  check_layer(layer);
  return layer;
}

double gradcheck_max_rel_error(std::uint64_t seed, int trials) {
  if (trials <= 0) fail(ErrKind::MalformedConfig, "gradcheck needs at least one trial");
  Rng rng(seed);
  const double step = 1e-5;
  const double kink_margin = 1e-3;  // keep relu inputs clear of 0 so the
                                    // central difference never crosses it
  double worst = 0.0;

  for (int trial = 0; trial < trials; ++trial) {
    const std::size_t d = 2 + rng.below(7);  // 2..8
    const std::size_t r = 1 + rng.below(4);  // 1..4
    LoraLinear layer = make_lora(d, r, 1.0, rng.next_u64());
    for (double& v : layer.B.data) v = rng.uniform(-0.5, 0.5);

    std::vector<double> x(d);
    std::vector<double> g(d);
    for (double& v : g) v = rng.uniform(-1.0, 1.0);
    while (true) {
      for (double& v : x) v = rng.uniform(-1.0, 1.0);
      const std::vector<double> z = matvec(layer.A, x);
      const bool clear = std::all_of(z.begin(), z.end(), [&](double v) {
        return std::abs(v) >= kink_margin;
      });
      if (clear) break;
    }

    const LoraGrads analytic = lora_backward(layer, x, g);
    auto loss = [&](const LoraLinear& probe) {
      return dot(g, lora_forward(probe, x));
    };
    auto rel_err = [](double a, double n) {
      return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6});
    };

    LoraLinear probe = layer;
    for (std::size_t i = 0; i < probe.A.data.size(); ++i) {
      const double saved = probe.A.data[i];
      probe.A.data[i] = saved + step;
      const double up = loss(probe);
      probe.A.data[i] = saved - step;
      const double down = loss(probe);
      probe.A.data[i] = saved;
      worst = std::max(worst, rel_err(analytic.dA.data[i], (up - down) / (2.0 * step)));
    }
    for (std::size_t i = 0; i < probe.B.data.size(); ++i) {
      const double saved = probe.B.data[i];
      probe.B.data[i] = saved + step;
      const double up = loss(probe);
      probe.B.data[i] = saved - step;
      const double down = loss(probe);
      probe.B.data[i] = saved;
      worst = std::max(worst, rel_err(analytic.dB.data[i], (up - down) / (2.0 * step)));
    }
  }
  return worst;
}

}  // namespace negkit
