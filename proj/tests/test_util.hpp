#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include <doctest.h>

#include "nerve/errors.hpp"
#include "nerve/ingest.hpp"

// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& name) {
    path = std::filesystem::temp_directory_path() / ("nerve_test_" + name + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

inline nerve::RowMatrix random_rows(std::size_t n, std::size_t d, std::uint64_t seed, double offset = 0.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  nerve::RowMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = offset + nd(gen) * static_cast<double>(j + 1);
  return m;
}

inline nerve::ActivationBatch random_batch(std::uint32_t b, std::uint32_t s, std::uint32_t d, std::uint64_t seed,
                                           nerve::Tag tag = nerve::Tag::pre) {
  nerve::DumpHeader h;
  h.dtype = nerve::DType::float64;
  h.batch = b;
  h.seq_len = s;
  h.feature_dim = d;
  h.tag = tag;
  return nerve::make_batch(h, random_rows(std::size_t{b} * s, d, seed));
}

#define CHECK_ERROR_KIND(expr, k)                           \
  do {                                                      \
    bool caught_ = false;                                   \
    try {                                                   \
      (void)(expr);                                         \
    } catch (const nerve::Error& e) {                       \
      caught_ = true;                                       \
      CHECK_MESSAGE(e.kind() == (k), e.what());             \
    }                                                       \
    CHECK_MESSAGE(caught_, "expected nerve::Error from " #expr); \
  } while (0)
