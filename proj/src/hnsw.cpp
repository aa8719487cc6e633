// Copyright 2026 The clausecheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "clausecheck/hnsw.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <queue>
#include <random>

#include "clausecheck/embedding.hpp"
#include "clausecheck/error.hpp"

namespace clausecheck {

namespace {

constexpr char kMagic[8] = {'C', 'C', 'H', 'N', 'S', 'W', '0', '1'};

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error(ErrorCode::kCorruptData, "truncated index file");
  return v;
}

// Per-thread visited marks; an epoch bump clears them in O(1).
struct VisitedSet {
  std::vector<std::uint32_t> marks;
  std::uint32_t epoch = 0;

  void reset(std::size_t n) {
    if (marks.size() < n) marks.resize(n, 0);
    if (++epoch == 0) {
      std::fill(marks.begin(), marks.end(), 0);
      epoch = 1;
    }
  }
  bool insert(std::uint32_t node) {
    if (marks[node] == epoch) return false;
    marks[node] = epoch;
    return true;
  }
};

VisitedSet& visited_for_thread() {
  thread_local VisitedSet set;
  return set;
}

}  // namespace

HnswParams hnsw_params_for_degree(std::size_t max_degree) {
  HnswParams p;
  p.max_degree = max_degree;
  p.level_multiplier = 1.0 / std::log(static_cast<double>(std::max<std::size_t>(max_degree, 2)));
  return p;
}

void check_params(const HnswParams& params) {
  if (params.max_degree < 2) throw Error(ErrorCode::kContractViolation, "HNSW M must be >= 2");
  if (params.ef_construction < params.max_degree) {
    throw Error(ErrorCode::kContractViolation, "HNSW ef_construction must be >= M");
  }
  if (params.ef_search == 0) throw Error(ErrorCode::kContractViolation, "HNSW ef_search must be >= 1");
  if (!(params.level_multiplier > 0.0)) {
    throw Error(ErrorCode::kContractViolation, "HNSW level multiplier must be positive");
  }
}

HnswIndex::HnswIndex(std::size_t dim, HnswParams params) : dim_(dim), params_(params) {
  check_params(params_);
}

int HnswIndex::random_level(std::uint64_t level_key) const {
  std::mt19937_64 gen(mix64(params_.seed ^ mix64(level_key)));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = 1.0 - uniform(gen);  // (0, 1]
  return static_cast<int>(std::floor(-std::log(u) * params_.level_multiplier));
}

double HnswIndex::distance(std::span<const double> q, std::uint32_t node) const {
  return squared_l2(q, vec(node));
}

std::uint32_t HnswIndex::greedy_descend(std::span<const double> q, std::uint32_t entry,
                                        int from_layer, int to_layer) const {
  std::uint32_t cur = entry;
  double cur_d = distance(q, cur);
  for (int layer = from_layer; layer >= to_layer; --layer) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (std::uint32_t n : links_[cur][static_cast<std::size_t>(layer)]) {
        const double d = distance(q, n);
        if (d < cur_d) {
          cur_d = d;
          cur = n;
          moved = true;
        }
      }
    }
  }
  return cur;
}

std::vector<HnswIndex::Candidate> HnswIndex::search_layer(std::span<const double> q,
                                                          std::uint32_t entry, std::size_t ef,
                                                          int layer, const Accept* accept) const {
  auto farther = [](const Candidate& a, const Candidate& b) { return a.distance > b.distance; };
  auto nearer = [](const Candidate& a, const Candidate& b) { return a.distance < b.distance; };
  // frontier: nearest on top; results: farthest on top.
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(farther)> frontier(farther);
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(nearer)> results(nearer);

  VisitedSet& visited = visited_for_thread();
  visited.reset(size());
  auto accepted = [&](std::uint32_t n) { return accept == nullptr || (*accept)(n); };

  const double d0 = distance(q, entry);
  visited.insert(entry);
  frontier.push({d0, entry});
  if (accepted(entry)) results.push({d0, entry});

  while (!frontier.empty()) {
    const Candidate c = frontier.top();
    if (results.size() >= ef && c.distance > results.top().distance) break;
    frontier.pop();
    for (std::uint32_t n : links_[c.node][static_cast<std::size_t>(layer)]) {
      if (!visited.insert(n)) continue;
      const double d = distance(q, n);
      if (results.size() < ef || d < results.top().distance) {
        frontier.push({d, n});
        if (accepted(n)) {
          results.push({d, n});
          if (results.size() > ef) results.pop();
        }
      }
    }
  }

  std::vector<Candidate> out;
  out.reserve(results.size());
  while (!results.empty()) {
    out.push_back(results.top());
    results.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

// Keeps a candidate only if it is closer to the base node than to every
// neighbor already kept, then tops up with the nearest pruned candidates so
// small or clustered graphs stay connected.
std::vector<std::uint32_t> HnswIndex::select_neighbors(std::vector<Candidate> candidates,
                                                       std::size_t m) const {
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.node < b.node);
  });
  std::vector<std::uint32_t> kept;
  std::vector<std::uint32_t> pruned;
  kept.reserve(m);
  for (const Candidate& c : candidates) {
    if (kept.size() >= m) break;
    bool diverse = true;
    for (std::uint32_t k : kept) {
      if (squared_l2(vec(c.node), vec(k)) < c.distance) {
        diverse = false;
        break;
      }
    }
    if (diverse) kept.push_back(c.node);
    else pruned.push_back(c.node);
  }
  for (std::size_t i = 0; i < pruned.size() && kept.size() < m; ++i) kept.push_back(pruned[i]);
  return kept;
}

void HnswIndex::shrink_links(std::uint32_t node, int layer) {
  auto& links = links_[node][static_cast<std::size_t>(layer)];
  std::vector<Candidate> cands;
  cands.reserve(links.size());
  for (std::uint32_t n : links) cands.push_back({squared_l2(vec(node), vec(n)), n});
  links = select_neighbors(std::move(cands), max_links(layer));
}

std::uint32_t HnswIndex::add(std::span<const double> v, std::uint64_t level_key) {
  if (v.size() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "HNSW insert of dim " + std::to_string(v.size()) +
                                                   " into index of dim " + std::to_string(dim_));
  }
  const auto node = static_cast<std::uint32_t>(size());
  const int level = random_level(level_key);
  data_.insert(data_.end(), v.begin(), v.end());
  levels_.push_back(level);
  links_.emplace_back(static_cast<std::size_t>(level) + 1);

  if (max_level_ < 0) {
    entry_point_ = node;
    max_level_ = level;
    return node;
  }

  std::uint32_t cur = entry_point_;
  if (level < max_level_) cur = greedy_descend(v, cur, max_level_, level + 1);

  for (int layer = std::min(level, max_level_); layer >= 0; --layer) {
    auto found = search_layer(v, cur, params_.ef_construction, layer, nullptr);
    auto chosen = select_neighbors(found, params_.max_degree);
    for (std::uint32_t n : chosen) {
      auto& back = links_[n][static_cast<std::size_t>(layer)];
      back.push_back(node);
      if (back.size() > max_links(layer)) shrink_links(n, layer);
    }
    links_[node][static_cast<std::size_t>(layer)] = std::move(chosen);
    if (!found.empty()) cur = found.front().node;
  }

  if (level > max_level_) {
    entry_point_ = node;
    max_level_ = level;
  }
  return node;
}

std::vector<HnswIndex::Neighbor> HnswIndex::search(std::span<const double> query, std::size_t k,
                                                   std::size_t ef, const Accept& accept) const {
  if (size() == 0 || k == 0) return {};
  if (query.size() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "HNSW query dim mismatch");
  }
  ef = std::max(ef, k);
  std::uint32_t cur = entry_point_;
  if (max_level_ > 0) cur = greedy_descend(query, cur, max_level_, 1);
  const auto found = search_layer(query, cur, ef, 0, accept ? &accept : nullptr);
  std::vector<Neighbor> out;
  for (std::size_t i = 0; i < found.size() && i < k; ++i) {
    out.push_back({found[i].node, found[i].distance});
  }
  return out;
}

void HnswIndex::save(std::ostream& out) const {
  out.write(kMagic, sizeof(kMagic));
  put<std::uint64_t>(out, dim_);
  put<std::uint64_t>(out, params_.max_degree);
  put<std::uint64_t>(out, params_.ef_search);
  put<std::uint64_t>(out, params_.ef_construction);
  put<double>(out, params_.level_multiplier);
  put<std::uint64_t>(out, params_.seed);
  put<std::uint64_t>(out, size());
  put<std::uint32_t>(out, entry_point_);
  put<std::int32_t>(out, max_level_);
  out.write(reinterpret_cast<const char*>(data_.data()),
            static_cast<std::streamsize>(data_.size() * sizeof(double)));
  for (std::size_t n = 0; n < size(); ++n) {
    put<std::int32_t>(out, levels_[n]);
    for (const auto& layer : links_[n]) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(layer.size()));
      out.write(reinterpret_cast<const char*>(layer.data()),
                static_cast<std::streamsize>(layer.size() * sizeof(std::uint32_t)));
    }
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing HNSW index");
}

HnswIndex HnswIndex::load(std::istream& in) {
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) {
    throw Error(ErrorCode::kCorruptData, "not an HNSW index file");
  }
  const auto dim = get<std::uint64_t>(in);
  HnswParams p;
  p.max_degree = get<std::uint64_t>(in);
  p.ef_search = get<std::uint64_t>(in);
  p.ef_construction = get<std::uint64_t>(in);
  p.level_multiplier = get<double>(in);
  p.seed = get<std::uint64_t>(in);
  HnswIndex index(dim, p);
  const auto count = get<std::uint64_t>(in);
  index.entry_point_ = get<std::uint32_t>(in);
  index.max_level_ = get<std::int32_t>(in);
  index.data_.resize(count * dim);
  in.read(reinterpret_cast<char*>(index.data_.data()),
          static_cast<std::streamsize>(index.data_.size() * sizeof(double)));
  if (!in) throw Error(ErrorCode::kCorruptData, "truncated index vectors");
  index.levels_.resize(count);
  index.links_.resize(count);
  for (std::size_t n = 0; n < count; ++n) {
    const int level = get<std::int32_t>(in);
    if (level < 0 || level > 64) throw Error(ErrorCode::kCorruptData, "bad node level");
    index.levels_[n] = level;
    index.links_[n].resize(static_cast<std::size_t>(level) + 1);
    for (auto& layer : index.links_[n]) {
      const auto len = get<std::uint32_t>(in);
      layer.resize(len);
      in.read(reinterpret_cast<char*>(layer.data()),
              static_cast<std::streamsize>(len * sizeof(std::uint32_t)));
      if (!in) throw Error(ErrorCode::kCorruptData, "truncated adjacency list");
      for (std::uint32_t m : layer) {
        if (m >= count) throw Error(ErrorCode::kCorruptData, "neighbor out of range");
      }
    }
  }
  if (count > 0 && (index.entry_point_ >= count || index.max_level_ < 0)) {
    throw Error(ErrorCode::kCorruptData, "bad entry point");
  }
  return index;
}

}  // namespace clausecheck
