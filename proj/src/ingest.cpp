#include "nerve/ingest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "nerve/errors.hpp"

namespace nerve {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T load_le(const unsigned char* p) {
  T value{};
  std::memcpy(&value, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    auto* bytes = reinterpret_cast<unsigned char*>(&value);
    std::reverse(bytes, bytes + sizeof(T));
  }
  return value;
}

template <typename T>
void store_le(unsigned char* p, T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto* bytes = reinterpret_cast<unsigned char*>(&value);
    std::reverse(bytes, bytes + sizeof(T));
  }
  std::memcpy(p, &value, sizeof(T));
}

std::string describe(const std::filesystem::path& path) { return "'" + path.string() + "'"; }

void validate_header(const DumpHeader& h, const std::filesystem::path& path) {
  if (h.batch == 0 || h.seq_len == 0 || h.feature_dim == 0) {
    fail(ErrorKind::format, describe(path) + ": B, S and D must all be >= 1");
  }
}

DumpHeader decode_header(const unsigned char* bytes, const std::filesystem::path& path) {
  if (std::memcmp(bytes, kDumpMagic.data(), kDumpMagic.size()) != 0) {
    fail(ErrorKind::format, describe(path) + ": bad magic");
  }
  const auto version = load_le<std::uint32_t>(bytes + 4);
  if (version != kDumpVersion) {
    fail(ErrorKind::format, describe(path) + ": unsupported version " + std::to_string(version));
  }
  const auto dtype = load_le<std::uint32_t>(bytes + 8);
  if (dtype > 1) fail(ErrorKind::format, describe(path) + ": unknown dtype " + std::to_string(dtype));
  const auto tag = bytes[36];
  if (tag > 1) fail(ErrorKind::format, describe(path) + ": unknown tag " + std::to_string(tag));

  DumpHeader h;
  h.dtype = static_cast<DType>(dtype);
  h.batch = load_le<std::uint32_t>(bytes + 12);
  h.seq_len = load_le<std::uint32_t>(bytes + 16);
  h.feature_dim = load_le<std::uint32_t>(bytes + 20);
  h.layer = load_le<std::uint32_t>(bytes + 24);
  h.step = load_le<std::uint64_t>(bytes + 28);
  h.tag = static_cast<Tag>(tag);
  validate_header(h, path);
  return h;
}

std::array<unsigned char, kDumpHeaderSize> encode_header(const DumpHeader& h) {
  std::array<unsigned char, kDumpHeaderSize> bytes{};
  std::memcpy(bytes.data(), kDumpMagic.data(), kDumpMagic.size());
  store_le<std::uint32_t>(bytes.data() + 4, kDumpVersion);
  store_le<std::uint32_t>(bytes.data() + 8, static_cast<std::uint32_t>(h.dtype));
  store_le<std::uint32_t>(bytes.data() + 12, h.batch);
  store_le<std::uint32_t>(bytes.data() + 16, h.seq_len);
  store_le<std::uint32_t>(bytes.data() + 20, h.feature_dim);
  store_le<std::uint32_t>(bytes.data() + 24, h.layer);
  store_le<std::uint64_t>(bytes.data() + 28, h.step);
  bytes[36] = static_cast<unsigned char>(h.tag);
  return bytes;
}

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + describe(path));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool has_magic(const std::vector<unsigned char>& bytes) {
  return bytes.size() >= kDumpMagic.size() &&
         std::memcmp(bytes.data(), kDumpMagic.data(), kDumpMagic.size()) == 0;
}

bool is_csv_path(const std::filesystem::path& path) { return path.extension() == ".csv"; }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <typename T>
T parse_unsigned(const std::string& text, const std::filesystem::path& path, const char* what) {
  std::size_t used = 0;
  unsigned long long value = 0;
  try {
    value = std::stoull(text, &used);
  } catch (const std::exception&) {
    fail(ErrorKind::format, describe(path) + ": bad " + what + " '" + text + "'");
  }
  if (used != text.size() || text.front() == '-') {
    fail(ErrorKind::format, describe(path) + ": bad " + what + " '" + text + "'");
  }
  return static_cast<T>(value);
}

ActivationBatch read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + describe(path));

  std::string line;
  std::vector<std::string> head;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    head = split_csv_line(line);
    if (!head.empty() && head[0] == "B") continue;  // column-name line
    break;
  }
  if (head.size() != 6) fail(ErrorKind::format, describe(path) + ": expected header B,S,D,layer,step,tag");

  DumpHeader h;
  h.dtype = DType::float64;
  h.batch = parse_unsigned<std::uint32_t>(head[0], path, "B");
  h.seq_len = parse_unsigned<std::uint32_t>(head[1], path, "S");
  h.feature_dim = parse_unsigned<std::uint32_t>(head[2], path, "D");
  h.layer = parse_unsigned<std::uint32_t>(head[3], path, "layer");
  h.step = parse_unsigned<std::uint64_t>(head[4], path, "step");
  try {
    h.tag = parse_tag(head[5]);
  } catch (const Error&) {
    fail(ErrorKind::format, describe(path) + ": bad tag '" + head[5] + "'");
  }
  validate_header(h, path);

  RowMatrix data(static_cast<Eigen::Index>(h.tokens()), h.feature_dim);
  Eigen::Index row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    if (row >= data.rows()) fail(ErrorKind::format, describe(path) + ": more rows than B*S");
    const auto fields = split_csv_line(line);
    if (fields.size() != h.feature_dim) {
      fail(ErrorKind::truncation, describe(path) + ": row " + std::to_string(row) + " has " +
                                      std::to_string(fields.size()) + " values, expected " +
                                      std::to_string(h.feature_dim));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      char* end = nullptr;
      const double v = std::strtod(fields[c].c_str(), &end);
      if (fields[c].empty() || end != fields[c].c_str() + fields[c].size()) {
        fail(ErrorKind::format, describe(path) + ": bad number '" + fields[c] + "'");
      }
      data(row, static_cast<Eigen::Index>(c)) = v;
    }
    ++row;
  }
  if (row != data.rows()) {
    fail(ErrorKind::truncation, describe(path) + ": expected " + std::to_string(data.rows()) +
                                    " rows, found " + std::to_string(row));
  }
  return make_batch(h, std::move(data));
}

}  // namespace

std::string_view to_string(Tag tag) { return tag == Tag::pre ? "pre" : "post"; }

Tag parse_tag(std::string_view text) {
  if (text == "pre") return Tag::pre;
  if (text == "post") return Tag::post;
  fail(ErrorKind::argument, "unknown tag '" + std::string(text) + "'");
}

std::size_t dtype_size(DType dtype) { return dtype == DType::float32 ? 4 : 8; }

std::array<std::ptrdiff_t, 2> first_non_finite(RowMatrixRef data) {
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      if (!std::isfinite(data(r, c))) return {r, c};
    }
  }
  return {-1, -1};
}

ActivationBatch make_batch(const DumpHeader& header, RowMatrix data) {
  if (header.batch == 0 || header.seq_len == 0 || header.feature_dim == 0) {
    fail(ErrorKind::argument, "B, S and D must all be >= 1");
  }
  if (static_cast<std::size_t>(data.rows()) != header.tokens() ||
      static_cast<std::size_t>(data.cols()) != header.feature_dim) {
    fail(ErrorKind::argument, "data shape " + std::to_string(data.rows()) + "x" + std::to_string(data.cols()) +
                                  " does not match header B*S x D = " + std::to_string(header.tokens()) + "x" +
                                  std::to_string(header.feature_dim));
  }
  if (const auto bad = first_non_finite(data); bad[0] >= 0) {
    fail(ErrorKind::data, "non-finite value at (row " + std::to_string(bad[0]) + ", col " + std::to_string(bad[1]) + ")");
  }
  ActivationBatch batch;
  batch.header = header;
  batch.data = std::move(data);
  const std::size_t n = header.tokens();
  batch.positions.resize(n);
  batch.source_rows.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    batch.positions[r] = static_cast<std::uint32_t>(r % header.seq_len);
    batch.source_rows[r] = r;
  }
  return batch;
}

DumpHeader read_dump_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + describe(path));
  std::array<unsigned char, kDumpHeaderSize> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got >= kDumpMagic.size() && std::memcmp(bytes.data(), kDumpMagic.data(), kDumpMagic.size()) == 0) {
    if (got < kDumpHeaderSize) fail(ErrorKind::truncation, describe(path) + ": header shorter than 64 bytes");
    return decode_header(bytes.data(), path);
  }
  if (is_csv_path(path)) return read_csv(path).header;
  fail(ErrorKind::format, describe(path) + ": bad magic");
}

ActivationBatch read_dump(const std::filesystem::path& path) {
  auto bytes = slurp(path);
  if (!has_magic(bytes)) {
    if (is_csv_path(path)) return read_csv(path);
    fail(ErrorKind::format, describe(path) + ": bad magic");
  }
  if (bytes.size() < kDumpHeaderSize) fail(ErrorKind::truncation, describe(path) + ": header shorter than 64 bytes");
  const DumpHeader h = decode_header(bytes.data(), path);

  const std::size_t expected = h.payload_bytes();
  const std::size_t actual = bytes.size() - kDumpHeaderSize;
  if (actual < expected) {
    fail(ErrorKind::truncation, describe(path) + ": payload has " + std::to_string(actual) + " bytes, header declares " +
                                    std::to_string(expected));
  }
  if (actual > expected) {
    fail(ErrorKind::format, describe(path) + ": " + std::to_string(actual - expected) + " trailing bytes after payload");
  }

  RowMatrix data(static_cast<Eigen::Index>(h.tokens()), h.feature_dim);
  const unsigned char* p = bytes.data() + kDumpHeaderSize;
  double* out = data.data();
  const std::size_t count = h.tokens() * h.feature_dim;
  if (h.dtype == DType::float32) {
    for (std::size_t i = 0; i < count; ++i) out[i] = static_cast<double>(load_le<float>(p + 4 * i));
  } else {
    for (std::size_t i = 0; i < count; ++i) out[i] = load_le<double>(p + 8 * i);
  }
  if (const auto bad = first_non_finite(data); bad[0] >= 0) {
    fail(ErrorKind::data, describe(path) + ": non-finite value at (row " + std::to_string(bad[0]) + ", col " +
                              std::to_string(bad[1]) + ")");
  }
  return make_batch(h, std::move(data));
}

void write_dump(const ActivationBatch& batch, const std::filesystem::path& path) {
  const DumpHeader& h = batch.header;
  if (batch.rows() != h.tokens() || batch.dim() != h.feature_dim) {
    fail(ErrorKind::argument, "write_dump needs a full batch matching its header");
  }
  std::vector<unsigned char> bytes(kDumpHeaderSize + h.payload_bytes());
  const auto head = encode_header(h);
  std::memcpy(bytes.data(), head.data(), head.size());
  unsigned char* p = bytes.data() + kDumpHeaderSize;
  const double* in = batch.data.data();
  const std::size_t count = h.tokens() * h.feature_dim;
  if (h.dtype == DType::float32) {
    for (std::size_t i = 0; i < count; ++i) store_le<float>(p + 4 * i, static_cast<float>(in[i]));
  } else {
    for (std::size_t i = 0; i < count; ++i) store_le<double>(p + 8 * i, in[i]);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open " + describe(path) + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) fail(ErrorKind::io, "write to " + describe(path) + " failed");
}

std::vector<PositionGroup> stratify_by_position(const ActivationBatch& batch, std::size_t n_groups) {
  const std::size_t seq_len = batch.header.seq_len;
  if (n_groups == 0 || n_groups > seq_len) {
    fail(ErrorKind::argument, "n_groups must be in [1, S=" + std::to_string(seq_len) + "], got " +
                                  std::to_string(n_groups));
  }
  const std::size_t base = seq_len / n_groups;
  const std::size_t extra = seq_len % n_groups;

  std::vector<PositionGroup> groups(n_groups);
  std::vector<std::size_t> group_of_pos(seq_len);
  std::size_t pos = 0;
  for (std::size_t g = 0; g < n_groups; ++g) {
    const std::size_t size = base + (g < extra ? 1 : 0);
    groups[g].index = g;
    groups[g].first_pos = static_cast<std::uint32_t>(pos);
    groups[g].last_pos = static_cast<std::uint32_t>(pos + size - 1);
    if (n_groups == 3) {
      static constexpr const char* kThirds[] = {"early", "middle", "late"};
      groups[g].label = kThirds[g];
    } else {
      groups[g].label = "g" + std::to_string(g);
    }
    for (std::size_t i = 0; i < size; ++i) group_of_pos[pos + i] = g;
    pos += size;
  }
  for (std::size_t r = 0; r < batch.rows(); ++r) groups[group_of_pos[batch.positions[r]]].rows.push_back(r);
  return groups;
}

ActivationBatch select_rows(const ActivationBatch& batch, const std::vector<std::size_t>& rows) {
  ActivationBatch out;
  out.header = batch.header;
  out.data.resize(static_cast<Eigen::Index>(rows.size()), batch.data.cols());
  out.positions.reserve(rows.size());
  out.source_rows.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    if (r >= batch.rows()) {
      fail(ErrorKind::argument, "row index " + std::to_string(r) + " out of range for " + std::to_string(batch.rows()) +
                                    "-row batch");
    }
    out.data.row(static_cast<Eigen::Index>(i)) = batch.data.row(static_cast<Eigen::Index>(r));
    out.positions.push_back(batch.positions[r]);
    out.source_rows.push_back(batch.source_rows[r]);
  }
  return out;
}

}  // namespace nerve
