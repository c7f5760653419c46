#pragma once

// Activation dump ingestion.
//
// Binary layout (little-endian, 64-byte header followed by a row-major
// payload of B*S*D values):
//
//   offset  size  field
//        0     4  magic "NRV1"
//        4     4  version (u32, currently 1)
//        8     4  dtype (u32: 0 = float32, 1 = float64)
//       12     4  batch B (u32)
//       16     4  seq_len S (u32)
//       20     4  feature_dim D (u32)
//       24     4  layer (u32)
//       28     8  train step (u64)
//       36     1  tag (u8: 0 = pre, 1 = post)
//       37    27  reserved, zero
//
// Row r of the flattened [B*S, D] matrix is token (b, s) with r = b*S + s.
//
// A CSV fallback is accepted for hand-written fixtures: a first line of
// `B,S,D,layer,step,tag` values (optionally preceded by that literal column
// name line), then B*S lines of D comma-separated values.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace nerve {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixRef = Eigen::Ref<const RowMatrix>;

enum class DType : std::uint32_t { float32 = 0, float64 = 1 };
enum class Tag : std::uint8_t { pre = 0, post = 1 };

std::string_view to_string(Tag tag);
Tag parse_tag(std::string_view text);
std::size_t dtype_size(DType dtype);

inline constexpr std::array<char, 4> kDumpMagic{'N', 'R', 'V', '1'};
inline constexpr std::uint32_t kDumpVersion = 1;
inline constexpr std::size_t kDumpHeaderSize = 64;

struct DumpHeader {
  DType dtype = DType::float32;
  std::uint32_t batch = 1;
  std::uint32_t seq_len = 1;
  std::uint32_t feature_dim = 1;
  std::uint32_t layer = 0;
  std::uint64_t step = 0;
  Tag tag = Tag::pre;

  std::size_t tokens() const { return std::size_t{batch} * seq_len; }
  std::size_t payload_bytes() const { return tokens() * feature_dim * dtype_size(dtype); }
  bool operator==(const DumpHeader&) const = default;
};

/// Flattened token x feature activations. `data` is promoted to float64;
/// `header.dtype` records what the dump stored.
///
/// `source_rows[i]` is the row of the original full [B*S, D] flattening that
/// row i came from (the identity for unsampled batches), and `positions[i]`
/// is its sequence position.
struct ActivationBatch {
  DumpHeader header;
  RowMatrix data;
  std::vector<std::uint32_t> positions;
  std::vector<std::size_t> source_rows;

  std::size_t rows() const { return static_cast<std::size_t>(data.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(data.cols()); }
  bool is_subsampled() const { return rows() != header.tokens(); }
};

/// Builds a full (unsampled) batch from a header and N x D data, filling
/// positions and source rows from the batch-major flattening. Validates
/// shape and finiteness.
ActivationBatch make_batch(const DumpHeader& header, RowMatrix data);

DumpHeader read_dump_header(const std::filesystem::path& path);
ActivationBatch read_dump(const std::filesystem::path& path);
void write_dump(const ActivationBatch& batch, const std::filesystem::path& path);

/// Row/col of the first NaN or Inf, or {-1, -1}.
std::array<std::ptrdiff_t, 2> first_non_finite(RowMatrixRef data);

struct PositionGroup {
  std::size_t index = 0;
  std::string label;           // "early"/"middle"/"late" for three groups, else "g<index>"
  std::uint32_t first_pos = 0; // inclusive
  std::uint32_t last_pos = 0;  // inclusive
  std::vector<std::size_t> rows;
};

/// Splits [0, S) into n_groups contiguous ranges whose sizes differ by at
/// most one, earlier groups taking the extra position, and assigns each row
/// of the batch to the group containing its position.
std::vector<PositionGroup> stratify_by_position(const ActivationBatch& batch, std::size_t n_groups);

/// Rows of `batch` listed in `rows`, in that order, with metadata carried.
ActivationBatch select_rows(const ActivationBatch& batch, const std::vector<std::size_t>& rows);

}  // namespace nerve
