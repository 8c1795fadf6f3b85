#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "naswot/rng.hpp"

namespace naswot {

// The five candidate operations of a NAS-Bench-201 / NATS-Bench TSS cell
// edge. Integer ids are stable and define enumeration order.
enum class OpKind : std::uint8_t {
  kZeroise = 0,
  kIdentity = 1,
  kConv3x3 = 2,
  kConv1x1 = 3,
  kAvgPool3x3 = 4,
};

inline constexpr std::size_t kNumOps = 5;
inline constexpr std::size_t kNumEdges = 6;
inline constexpr std::size_t kNumNodes = 4;
inline constexpr std::size_t kSpaceSize = 15625;  // 5^6

inline constexpr std::array<OpKind, kNumOps> kAllOps = {
    OpKind::kZeroise, OpKind::kIdentity, OpKind::kConv3x3, OpKind::kConv1x1,
    OpKind::kAvgPool3x3};

// Benchmark-export vocabulary: none, skip_connect, nor_conv_3x3,
// nor_conv_1x1, avg_pool_3x3.
std::string_view op_name(OpKind op) noexcept;
// Throws MalformedArchString on an unknown name.
OpKind op_from_name(std::string_view name);
constexpr int op_id(OpKind op) noexcept { return static_cast<int>(op); }

// A directed edge of the 4-node cell DAG. Nodes are 0=A (input), 1=B, 2=C,
// 3=D (output).
struct Edge {
  int from;
  int to;
};

// Edge indices follow the canonical string's node-grouped layout:
// A->B, A->C, B->C, A->D, B->D, C->D.
inline constexpr std::array<Edge, kNumEdges> kEdges = {
    Edge{0, 1}, Edge{0, 2}, Edge{1, 2}, Edge{0, 3}, Edge{1, 3}, Edge{2, 3}};

// Index into kEdges of edge (from -> to). Requires 0 <= from < to < 4.
constexpr std::size_t edge_index(int from, int to) noexcept {
  // Edges into node `to` start at offset to*(to-1)/2.
  return static_cast<std::size_t>(to * (to - 1) / 2 + from);
}

// One cell of the search space: an operation per edge.
class Genotype {
 public:
  Genotype() = default;  // all-ZEROISE
  explicit constexpr Genotype(const std::array<OpKind, kNumEdges>& ops) : ops_(ops) {}

  static Genotype uniform(OpKind op) {
    std::array<OpKind, kNumEdges> ops{};
    ops.fill(op);
    return Genotype(ops);
  }

  // Position in lexicographic op-id order (edge 0 most significant), in
  // [0, 15625).
  static Genotype from_index(std::size_t index);
  std::size_t index() const noexcept;

  OpKind op(std::size_t edge) const { return ops_.at(edge); }
  OpKind op(int from, int to) const { return ops_.at(edge_index(from, to)); }
  const std::array<OpKind, kNumEdges>& ops() const noexcept { return ops_; }

  // Copy with one edge reassigned.
  Genotype with_op(std::size_t edge, OpKind op) const;

  std::size_t count(OpKind op) const noexcept;

  friend bool operator==(const Genotype&, const Genotype&) = default;
  friend auto operator<=>(const Genotype& a, const Genotype& b) {
    return a.index() <=> b.index();
  }

 private:
  std::array<OpKind, kNumEdges> ops_{};
};

// Canonical architecture string, e.g.
// |nor_conv_3x3~0|+|none~0|skip_connect~1|+|avg_pool_3x3~0|nor_conv_1x1~1|skip_connect~2|
Genotype parse_arch(std::string_view text);
std::string format_arch(const Genotype& g);

Genotype sample_uniform(Rng& rng);

// All 15,625 genotypes in lexicographic op-id order.
std::vector<Genotype> enumerate_all();

// All genotypes whose edges use only `ops`, in lexicographic op-id order.
// Used for reduced spaces such as {ZEROISE, IDENTITY, CONV_3x3}^6.
std::vector<Genotype> enumerate_restricted(std::span<const OpKind> ops);

// Reassign one uniformly chosen edge to a uniformly chosen different op.
Genotype mutate(const Genotype& g, Rng& rng);

// Number of edges on which two genotypes differ.
std::size_t hamming_distance(const Genotype& a, const Genotype& b) noexcept;

}  // namespace naswot

template <>
struct std::hash<naswot::Genotype> {
  std::size_t operator()(const naswot::Genotype& g) const noexcept { return g.index(); }
};
