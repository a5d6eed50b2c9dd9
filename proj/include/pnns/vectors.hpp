#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "pnns/common.hpp"
#include "pnns/serial.hpp"

namespace pnns {

/// Dense row-major float32 vectors with one external u64 id per row.
struct VectorSet {
  std::uint32_t dim = 0;
  std::vector<std::uint64_t> ids;
  std::vector<float> data;  // count * dim

  std::size_t count() const { return ids.size(); }
  std::span<const float> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
  std::span<float> row(std::size_t i) { return {data.data() + i * dim, dim}; }

  void append(std::uint64_t id, std::span<const float> v) {
    if (v.size() != dim) throw DataError("VectorSet::append: dimension mismatch");
    ids.push_back(id);
    data.insert(data.end(), v.begin(), v.end());
  }

  void validate() const {
    if (data.size() != count() * dim) throw InvariantError("VectorSet: ragged storage");
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(ids.size());
    for (std::uint64_t id : ids)
      if (!seen.insert(id).second) throw DataError("VectorSet: duplicate id " + std::to_string(id));
    for (float v : data)
      if (!std::isfinite(v)) throw DataError("VectorSet: non-finite value");
  }
};

inline void normalize_in_place(std::span<float> v) {
  double sq = 0.0;
  for (float x : v) sq += double(x) * double(x);
  if (sq <= 0.0) return;  // zero vector stays zero
  float inv = float(1.0 / std::sqrt(sq));
  for (float& x : v) x *= inv;
}

inline float dot(std::span<const float> a, std::span<const float> b) {
  float s = 0.f;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// VEC1 vector file: magic `VEC1`, u32 version=1, u64 count, u32 dim,
/// u32 id width=8, then per row a u64 external id followed by dim f32 LE.
inline void save_vectors(const VectorSet& vs, const std::string& path) {
  auto os = detail::open_binary_out(path);
  detail::write_magic(os, "VEC1");
  detail::write_u32(os, 1);
  detail::write_u64(os, vs.count());
  detail::write_u32(os, vs.dim);
  detail::write_u32(os, 8);
  for (std::size_t i = 0; i < vs.count(); ++i) {
    detail::write_u64(os, vs.ids[i]);
    detail::write_f32_block(os, vs.row(i));
  }
  if (!os) throw DataError("write failed: " + path);
}

inline VectorSet load_vectors(const std::string& path) {
  auto is = detail::open_binary_in(path);
  detail::expect_magic(is, "VEC1", path);
  std::uint32_t version = detail::read_u32(is);
  if (version != 1) throw DataError(path + ": unsupported VEC1 version " + std::to_string(version));
  std::uint64_t count = detail::read_u64(is);
  std::uint32_t dim = detail::read_u32(is);
  std::uint32_t id_width = detail::read_u32(is);
  if (id_width != 8) throw DataError(path + ": unsupported id width " + std::to_string(id_width));
  if (dim == 0) throw DataError(path + ": zero dimension");
  VectorSet vs;
  vs.dim = dim;
  vs.ids.resize(count);
  vs.data.resize(count * dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    vs.ids[i] = detail::read_u64(is);
    detail::read_f32_block(is, vs.row(i));
  }
  return vs;
}

}  // namespace pnns
