#include "negkit/emb_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "negkit/errors.hpp"

namespace negkit {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

void put_u32_le(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff),
                         static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

std::uint32_t get_u32_le(std::istream& in) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  if (!in) fail(ErrKind::FormatError, "truncated embedding block header");
  return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) |
         (static_cast<std::uint32_t>(bytes[3]) << 24);
}

}  // namespace

void write_emb_block(std::ostream& out, const Matrix& m) {
  if (m.rows == 0 || m.cols == 0) fail(ErrKind::FormatError, "refusing to write empty block");
  out.write(kMagic, 4);
  put_u32_le(out, static_cast<std::uint32_t>(m.rows));
  put_u32_le(out, static_cast<std::uint32_t>(m.cols));
  for (double v : m.data) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32_le(out, bits);
  }
  if (!out) fail(ErrKind::IoError, "embedding block write failed");
}

Matrix read_emb_block(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in) fail(ErrKind::FormatError, "truncated embedding block magic");
  if (std::memcmp(magic, kMagic, 4) != 0) {
    fail(ErrKind::FormatError, "bad embedding block magic");
  }
  const std::uint32_t rows = get_u32_le(in);
  const std::uint32_t cols = get_u32_le(in);
  if (rows == 0 || cols == 0) fail(ErrKind::FormatError, "embedding block with zero extent");
  Matrix m(rows, cols);
  for (double& slot : m.data) {
    const std::uint32_t bits = get_u32_le(in);
    float f;
    std::memcpy(&f, &bits, 4);
    if (!std::isfinite(f)) fail(ErrKind::NonFiniteInput, "embedding block holds NaN/Inf");
    slot = static_cast<double>(f);
  }
  return m;
}

std::vector<Matrix> read_emb_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrKind::IoError, "cannot open embedding file: " + path);
  std::vector<Matrix> blocks;
  while (true) {
    // Stop cleanly at end of file, but reject trailing garbage.
    if (in.peek() == std::char_traits<char>::eof()) break;
    blocks.push_back(read_emb_block(in));
  }
  if (blocks.empty()) fail(ErrKind::FormatError, "embedding file has no blocks: " + path);
  return blocks;
}

void write_emb_file(const std::string& path, const std::vector<Matrix>& mats) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrKind::IoError, "cannot create embedding file: " + path);
  for (const Matrix& m : mats) write_emb_block(out, m);
}

njson matrix_to_json_rows(const Matrix& m) {
  njson rows = njson::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    njson row = njson::array();
    for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m.at(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json_rows(const njson& rows) {
  if (!rows.is_array() || rows.empty()) {
    fail(ErrKind::FormatError, "embedding rows must be a non-empty array");
  }
  const std::size_t n = rows.size();
  std::size_t d = 0;
  Matrix m;
  for (std::size_t r = 0; r < n; ++r) {
    const njson& row = rows[r];
    if (!row.is_array() || row.empty()) {
      fail(ErrKind::FormatError, "embedding row must be a non-empty array");
    }
    if (r == 0) {
      d = row.size();
      m = Matrix(n, d);
    } else if (row.size() != d) {
      fail(ErrKind::FormatError, "embedding rows have inconsistent widths");
    }
    for (std::size_t c = 0; c < d; ++c) {
      if (!row[c].is_number()) fail(ErrKind::FormatError, "embedding entry is not a number");
      const double v = row[c].get<double>();
      if (!std::isfinite(v)) fail(ErrKind::NonFiniteInput, "embedding entry is NaN/Inf");
      m.at(r, c) = v;
    }
  }
  return m;
}

std::vector<CaptionEmbedding> read_embedding_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrKind::IoError, "cannot open embedding file: " + path);
  std::vector<CaptionEmbedding> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    njson j;
    try {
      j = njson::parse(line);
    } catch (const njson::exception& e) {
      fail(ErrKind::FormatError,
           path + ":" + std::to_string(lineno) + ": bad JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("embeddings")) {
      fail(ErrKind::FormatError,
           path + ":" + std::to_string(lineno) + ": expected {caption, embeddings}");
    }
    CaptionEmbedding rec;
    if (j.contains("caption")) rec.caption = j.at("caption").get<std::string>();
    rec.embedding = matrix_from_json_rows(j.at("embeddings"));
    records.push_back(std::move(rec));
  }
  if (records.empty()) fail(ErrKind::FormatError, "embedding file has no records: " + path);
  return records;
}

void write_embedding_jsonl(const std::string& path,
                           const std::vector<CaptionEmbedding>& records) {
  std::ofstream out(path);
  if (!out) fail(ErrKind::IoError, "cannot create embedding file: " + path);
  for (const CaptionEmbedding& rec : records) {
    njson j;
    j["caption"] = rec.caption;
    j["embeddings"] = matrix_to_json_rows(rec.embedding);
    out << j.dump() << "\n";
  }
}

std::vector<CaptionEmbedding> read_embeddings_any(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) fail(ErrKind::IoError, "cannot open embedding file: " + path);
  char magic[4] = {0, 0, 0, 0};
  probe.read(magic, 4);
  probe.close();
  if (std::memcmp(magic, "EMB1", 4) == 0) {
    std::vector<CaptionEmbedding> records;
    for (Matrix& m : read_emb_file(path)) {
      CaptionEmbedding rec;
      rec.embedding = std::move(m);
      records.push_back(std::move(rec));
    }
    return records;
  }
  return read_embedding_jsonl(path);
}

}  // namespace negkit
