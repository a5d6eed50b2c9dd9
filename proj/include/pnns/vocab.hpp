#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "pnns/common.hpp"

namespace pnns {

struct VocabConfig {
  std::uint32_t unigram_capacity = 2000;
  std::uint32_t bigram_capacity = 0;   // word bigrams, disabled by default
  std::uint32_t trigram_capacity = 0;  // char trigrams, disabled by default
  std::uint32_t oov_bins = 500;
};

/// Token feature table with a fixed layout: [unigrams][bigrams][trigrams][oov].
/// The token -> index mapping is total: features missing from the fitted
/// tables hash into the OOV region.
class TokenVocab {
 public:
  TokenVocab() = default;

  static TokenVocab fit(const std::vector<std::vector<std::string>>& token_lists,
                        const VocabConfig& cfg) {
    TokenVocab v;
    v.cfg_ = cfg;
    auto count_and_keep = [](std::unordered_map<std::string, std::uint64_t>& counts,
                             std::uint32_t capacity) {
      std::vector<std::pair<std::string, std::uint64_t>> items(counts.begin(), counts.end());
      std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
      });
      if (items.size() > capacity) items.resize(capacity);
      return items;
    };

    std::unordered_map<std::string, std::uint64_t> uni, bi, tri;
    for (const auto& tokens : token_lists) {
      for (const auto& t : tokens) ++uni[t];
      if (cfg.bigram_capacity > 0)
        for (std::size_t i = 0; i + 1 < tokens.size(); ++i) ++bi[tokens[i] + " " + tokens[i + 1]];
      if (cfg.trigram_capacity > 0)
        for (const auto& t : tokens)
          for (std::size_t i = 0; i + 3 <= t.size(); ++i) ++tri[t.substr(i, 3)];
    }
    std::uint32_t next = 0;
    for (auto& [tok, cnt] : count_and_keep(uni, cfg.unigram_capacity)) v.unigrams_[tok] = next++;
    v.bigram_offset_ = next;
    for (auto& [tok, cnt] : count_and_keep(bi, cfg.bigram_capacity)) v.bigrams_[tok] = next++;
    v.trigram_offset_ = next;
    for (auto& [tok, cnt] : count_and_keep(tri, cfg.trigram_capacity)) v.trigrams_[tok] = next++;
    v.oov_offset_ = next;
    return v;
  }

  std::uint32_t size() const { return oov_offset_ + cfg_.oov_bins; }

  /// Feature indices for a token list: one unigram per token, plus bigrams
  /// and char trigrams when enabled.
  std::vector<std::uint32_t> features(const std::vector<std::string>& tokens) const {
    std::vector<std::uint32_t> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(lookup(unigrams_, t, "1:"));
    if (cfg_.bigram_capacity > 0)
      for (std::size_t i = 0; i + 1 < tokens.size(); ++i)
        out.push_back(lookup(bigrams_, tokens[i] + " " + tokens[i + 1], "2:"));
    if (cfg_.trigram_capacity > 0)
      for (const auto& t : tokens)
        for (std::size_t i = 0; i + 3 <= t.size(); ++i)
          out.push_back(lookup(trigrams_, t.substr(i, 3), "3:"));
    return out;
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "#unigrams=" << cfg_.unigram_capacity << " bigrams=" << cfg_.bigram_capacity
        << " trigrams=" << cfg_.trigram_capacity << " oov=" << cfg_.oov_bins << '\n';
    auto dump = [&](const std::unordered_map<std::string, std::uint32_t>& m, const char* kind) {
      std::vector<std::pair<std::uint32_t, std::string>> rows;
      rows.reserve(m.size());
      for (const auto& [tok, idx] : m) rows.emplace_back(idx, tok);
      std::sort(rows.begin(), rows.end());
      for (const auto& [idx, tok] : rows) out << kind << '\t' << tok << '\t' << idx << '\n';
    };
    dump(unigrams_, "1");
    dump(bigrams_, "2");
    dump(trigrams_, "3");
  }

 private:
  std::uint32_t lookup(const std::unordered_map<std::string, std::uint32_t>& m,
                       const std::string& key, const char* kind) const {
    auto it = m.find(key);
    if (it != m.end()) return it->second;
    if (cfg_.oov_bins == 0) throw DataError("TokenVocab: OOV feature with zero OOV bins");
    return oov_offset_ + static_cast<std::uint32_t>(detail::fnv1a64(std::string(kind) + key) % cfg_.oov_bins);
  }

  VocabConfig cfg_;
  std::unordered_map<std::string, std::uint32_t> unigrams_, bigrams_, trigrams_;
  std::uint32_t bigram_offset_ = 0, trigram_offset_ = 0, oov_offset_ = 0;
};

}  // namespace pnns
