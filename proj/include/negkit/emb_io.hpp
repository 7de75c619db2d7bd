#pragma once

// Embedding matrix serialization.  Two interchangeable container formats:
//
//   binary  - one or more blocks, each: magic "EMB1", u32 rows, u32 cols
//             (little-endian), then rows*cols float32 little-endian values
//             in row-major order;
//   JSONL   - one object per line: {"caption": str, "embeddings": [[...]]}.
//
// Values are stored as 32-bit floats on disk but widened to doubles in
// memory; all arithmetic happens in 64-bit.

#include <iosfwd>
#include <string>
#include <vector>

#include "negkit/json.hpp"
#include "negkit/matrix.hpp"

namespace negkit {

struct CaptionEmbedding {
  std::string caption;  // empty when the source format carries no text
  Matrix embedding;     // tokens x dim, rows >= 1
};

void write_emb_block(std::ostream& out, const Matrix& m);
Matrix read_emb_block(std::istream& in);  // FormatError / NonFiniteInput

// Whole-file variants; a binary file is a plain concatenation of blocks.
std::vector<Matrix> read_emb_file(const std::string& path);
void write_emb_file(const std::string& path, const std::vector<Matrix>& mats);

std::vector<CaptionEmbedding> read_embedding_jsonl(const std::string& path);
void write_embedding_jsonl(const std::string& path,
                           const std::vector<CaptionEmbedding>& records);

// Reads either container based on the leading bytes (binary magic vs JSON).
std::vector<CaptionEmbedding> read_embeddings_any(const std::string& path);

njson matrix_to_json_rows(const Matrix& m);
Matrix matrix_from_json_rows(const njson& rows);  // FormatError / NonFiniteInput

}  // namespace negkit
