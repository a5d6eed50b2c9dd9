#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "pnns/common.hpp"

namespace pnns {

/// One positive (query, document) observation, weighted by event count.
struct InteractionRecord {
  std::string query_id;
  std::string doc_id;
  std::uint32_t weight = 1;  // >= 1
};

/// Parses an interactions TSV: `query_id<TAB>doc_id<TAB>weight`, UTF-8, no header.
/// Malformed lines are reported with their 1-based line number.
inline std::vector<InteractionRecord> load_interactions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open interactions file: " + path);
  std::vector<InteractionRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cols = detail::split(line, '\t');
    if (cols.size() != 3)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected 3 tab-separated columns, got " +
                      std::to_string(cols.size()));
    if (cols[0].empty() || cols[1].empty())
      throw DataError(path + ":" + std::to_string(lineno) + ": empty query or doc id");
    std::uint64_t w = 0;
    bool ok = !cols[2].empty();
    for (char c : cols[2]) {
      if (c < '0' || c > '9') {
        ok = false;
        break;
      }
      w = w * 10 + std::uint64_t(c - '0');
      if (w > UINT32_MAX) {
        ok = false;
        break;
      }
    }
    if (!ok)
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": weight must be a positive integer below 2^32, got '" + std::string(cols[2]) + "'");
    if (w == 0)
      throw DataError(path + ":" + std::to_string(lineno) + ": weight must be >= 1");
    records.push_back({std::string(cols[0]), std::string(cols[1]), static_cast<std::uint32_t>(w)});
  }
  return records;
}

inline void save_interactions(const std::vector<InteractionRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  for (const auto& r : records) out << r.query_id << '\t' << r.doc_id << '\t' << r.weight << '\n';
}

}  // namespace pnns
