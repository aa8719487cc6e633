// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace clausecheck {

struct HnswParams {
  std::size_t max_degree = 48;        // M; layer 0 allows 2M
  std::size_t ef_search = 500;
  std::size_t ef_construction = 200;
  double level_multiplier = 1.0 / std::log(48.0);  // mL
  std::uint64_t seed = 0;

  bool operator==(const HnswParams&) const = default;
};

/// Builds params for a given M with mL = 1/ln(M).
HnswParams hnsw_params_for_degree(std::size_t max_degree);

/// Throws Error(kContractViolation) unless M >= 2 and ef_construction >= M.
void check_params(const HnswParams& params);

/// Hierarchical navigable small world graph over squared Euclidean distance.
///
/// Nodes are dense indices 0..size()-1 in insertion order; the caller maps
/// them to record ids. A node's top layer is floor(-ln(U) * mL) where U in
/// (0, 1] is drawn from a generator seeded by (params.seed, level_key), so the
/// same inserts in the same order always produce the same graph.
///
/// Not internally synchronized: one writer or many readers.
class HnswIndex {
 public:
  struct Neighbor {
    std::uint32_t node;
    double distance;  // squared L2
  };
  using Accept = std::function<bool(std::uint32_t)>;

  HnswIndex(std::size_t dim, HnswParams params);

  std::uint32_t add(std::span<const double> vec, std::uint64_t level_key);

  /// Up to k nearest accepted nodes, nearest first. When `accept` is set the
  /// beam still walks through rejected nodes but never returns them.
  std::vector<Neighbor> search(std::span<const double> query, std::size_t k, std::size_t ef,
                               const Accept& accept = {}) const;

  std::size_t size() const noexcept { return levels_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const HnswParams& params() const noexcept { return params_; }
  int max_level() const noexcept { return max_level_; }
  int level(std::uint32_t node) const { return levels_[node]; }
  const std::vector<std::uint32_t>& neighbors(std::uint32_t node, int layer) const {
    return links_[node][static_cast<std::size_t>(layer)];
  }
  std::size_t max_links(int layer) const {
    return layer == 0 ? 2 * params_.max_degree : params_.max_degree;
  }

  int random_level(std::uint64_t level_key) const;

  void save(std::ostream& out) const;
  static HnswIndex load(std::istream& in);

 private:
  struct Candidate {
    double distance;
    std::uint32_t node;
  };

  std::span<const double> vec(std::uint32_t node) const {
    return {data_.data() + static_cast<std::size_t>(node) * dim_, dim_};
  }
  double distance(std::span<const double> q, std::uint32_t node) const;
  std::uint32_t greedy_descend(std::span<const double> q, std::uint32_t entry, int from_layer,
                               int to_layer) const;
  std::vector<Candidate> search_layer(std::span<const double> q, std::uint32_t entry,
                                      std::size_t ef, int layer, const Accept* accept) const;
  std::vector<std::uint32_t> select_neighbors(std::vector<Candidate> candidates,
                                              std::size_t m) const;
  void shrink_links(std::uint32_t node, int layer);

  std::size_t dim_;
  HnswParams params_;
  std::vector<double> data_;
  std::vector<int> levels_;
  std::vector<std::vector<std::vector<std::uint32_t>>> links_;
  std::uint32_t entry_point_ = 0;
  int max_level_ = -1;
};

}  // namespace clausecheck
