#pragma once

// Low-rank residual adapter around a frozen square projection:
//
//   y = W x + alpha * B * relu(A x)
//
// W (d x d) stays fixed; A (r x d) starts uniform in [-1/sqrt(d), 1/sqrt(d)],
// B (d x r) starts at zero so a fresh adapter is exactly the identity delta.
// The relu gate means backward must use the subgradient convention
// relu'(0) = 0:
//
//   dB = alpha * g * relu(Ax)^T
//   dA = alpha * (B^T g  elementwise*  relu'(Ax)) * x^T
//
// where g is the upstream gradient on y.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "negkit/execution.hpp"
#include "negkit/json.hpp"
#include "negkit/matrix.hpp"
#include "negkit/textparse.hpp"

namespace negkit {

struct LoraLinear {
  Matrix W;  // d x d, frozen
  Matrix A;  // r x d
  Matrix B;  // d x r, zero at init
  double alpha = 1.0;

  std::size_t dim() const { return W.rows; }
  std::size_t rank() const { return A.rows; }
};

// Fresh layer with random W and A, zero B.  Throws ShapeMismatch on zero
// extents, MalformedConfig on a non-finite or non-positive alpha.
LoraLinear make_lora(std::size_t d, std::size_t r, double alpha, std::uint64_t seed);

std::vector<double> lora_forward(const LoraLinear& layer, const std::vector<double>& x);

struct LoraGrads {
  Matrix dA;  // r x d
  Matrix dB;  // d x r
};
LoraGrads lora_backward(const LoraLinear& layer, const std::vector<double>& x,
                        const std::vector<double>& upstream);

// Row-wise batch forward; Serial and Parallel produce identical output.
Matrix forward_batch(const LoraLinear& layer, const Matrix& inputs, Execution exec);

// Which decoder blocks receive adapters in a six-block stack.
enum class PlacementScheme { Shallow, Strided, Deep };
PlacementScheme placement_from_string(const std::string& name);  // UnknownScheme
std::vector<int> placement(PlacementScheme scheme, int num_blocks = 6);

// Mean attention mass per word class.  `blocks` holds one queries x tokens
// matrix per decoder block (heads averaged or flattened upstream); `classes`
// labels the token axis.  Every row must be a distribution: entries >= 0,
// sum within 1e-4 of 1 (RowNotNormalized otherwise); column count must match
// the class list (ShapeMismatch).  Means are taken over every (query, token)
// cell of a class, per block and aggregated across blocks; only classes that
// actually occur appear in the maps.
struct AttentionDiagnostics {
  std::map<std::string, double> per_class;
  std::vector<std::map<std::string, double>> per_block;
};
AttentionDiagnostics attention_by_class(const std::vector<Matrix>& blocks,
                                        const std::vector<WordTag>& classes);
njson attention_to_json(const AttentionDiagnostics& diag);

// Checkpoint: one JSON header line {"d", "r", "alpha"} followed by the W, A,
// B matrices as binary embedding blocks (float32 on disk, so a save/load
// round trip is exact only to single precision).
void save_checkpoint(const LoraLinear& layer, const std::string& path);
LoraLinear load_checkpoint(const std::string& path);

// Self-check used by the CLI: analytic gradients of random layers (nonzero
// B, relu inputs kept away from the kink) against central finite differences
// with step 1e-5.  Returns the largest relative error observed.
double gradcheck_max_rel_error(std::uint64_t seed, int trials);

}  // namespace negkit
