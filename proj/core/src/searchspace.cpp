#include "naswot/searchspace.hpp"

#include <algorithm>
#include <stdexcept>

#include "naswot/error.hpp"

namespace naswot {
namespace {

constexpr std::array<std::string_view, kNumOps> kOpNames = {
    "none", "skip_connect", "nor_conv_3x3", "nor_conv_1x1", "avg_pool_3x3"};

[[noreturn]] void malformed(std::string_view text, const std::string& why) {
  throw MalformedArchString("malformed architecture string '" + std::string(text) +
                            "': " + why);
}

}  // namespace

std::string_view op_name(OpKind op) noexcept {
  return kOpNames[static_cast<std::size_t>(op)];
}

OpKind op_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNumOps; ++i) {
    if (kOpNames[i] == name) return static_cast<OpKind>(i);
  }
  throw MalformedArchString("unknown operation '" + std::string(name) + "'");
}

Genotype Genotype::from_index(std::size_t index) {
  if (index >= kSpaceSize) {
    throw std::out_of_range("Genotype::from_index: index out of range");
  }
  std::array<OpKind, kNumEdges> ops{};
  for (std::size_t e = kNumEdges; e-- > 0;) {
    ops[e] = static_cast<OpKind>(index % kNumOps);
    index /= kNumOps;
  }
  return Genotype(ops);
}

std::size_t Genotype::index() const noexcept {
  std::size_t idx = 0;
  for (OpKind op : ops_) idx = idx * kNumOps + static_cast<std::size_t>(op);
  return idx;
}

Genotype Genotype::with_op(std::size_t edge, OpKind op) const {
  auto ops = ops_;
  ops.at(edge) = op;
  return Genotype(ops);
}

std::size_t Genotype::count(OpKind op) const noexcept {
  return static_cast<std::size_t>(std::count(ops_.begin(), ops_.end(), op));
}

// Grammar: one '|'-delimited group per target node B, C, D, joined by '+';
// group for node j lists j tokens "op~i" with i = 0..j-1 in order.
Genotype parse_arch(std::string_view text) {
  std::array<OpKind, kNumEdges> ops{};
  std::size_t pos = 0;
  for (int to = 1; to < static_cast<int>(kNumNodes); ++to) {
    if (to > 1) {
      if (pos >= text.size() || text[pos] != '+') malformed(text, "expected '+' between node groups");
      ++pos;
    }
    if (pos >= text.size() || text[pos] != '|') malformed(text, "node group must start with '|'");
    ++pos;
    for (int from = 0; from < to; ++from) {
      const std::size_t bar = text.find('|', pos);
      if (bar == std::string_view::npos) malformed(text, "unterminated token");
      const std::string_view token = text.substr(pos, bar - pos);
      const std::size_t tilde = token.find('~');
      if (tilde == std::string_view::npos) malformed(text, "token '" + std::string(token) + "' lacks '~'");
      const std::string_view name = token.substr(0, tilde);
      const std::string_view source = token.substr(tilde + 1);
      if (source.size() != 1 || source[0] != static_cast<char>('0' + from)) {
        malformed(text, "token '" + std::string(token) + "' has wrong source index (expected " +
                            std::to_string(from) + ")");
      }
      OpKind op{};
      try {
        op = op_from_name(name);
      } catch (const MalformedArchString&) {
        malformed(text, "unknown operation '" + std::string(name) + "'");
      }
      ops[edge_index(from, to)] = op;
      pos = bar + 1;
    }
  }
  if (pos != text.size()) malformed(text, "trailing characters or wrong group count");
  return Genotype(ops);
}

std::string format_arch(const Genotype& g) {
  std::string out;
  out.reserve(120);
  for (int to = 1; to < static_cast<int>(kNumNodes); ++to) {
    if (to > 1) out += '+';
    out += '|';
    for (int from = 0; from < to; ++from) {
      out += op_name(g.op(from, to));
      out += '~';
      out += static_cast<char>('0' + from);
      out += '|';
    }
  }
  return out;
}

Genotype sample_uniform(Rng& rng) {
  return Genotype::from_index(static_cast<std::size_t>(rng.uniform_index(kSpaceSize)));
}

std::vector<Genotype> enumerate_all() {
  std::vector<Genotype> all;
  all.reserve(kSpaceSize);
  for (std::size_t i = 0; i < kSpaceSize; ++i) all.push_back(Genotype::from_index(i));
  return all;
}

std::vector<Genotype> enumerate_restricted(std::span<const OpKind> ops) {
  std::vector<OpKind> allowed(ops.begin(), ops.end());
  std::sort(allowed.begin(), allowed.end());
  allowed.erase(std::unique(allowed.begin(), allowed.end()), allowed.end());
  std::vector<Genotype> out;
  for (std::size_t i = 0; i < kSpaceSize; ++i) {
    const Genotype g = Genotype::from_index(i);
    const bool ok = std::all_of(g.ops().begin(), g.ops().end(), [&](OpKind op) {
      return std::binary_search(allowed.begin(), allowed.end(), op);
    });
    if (ok) out.push_back(g);
  }
  return out;
}

Genotype mutate(const Genotype& g, Rng& rng) {
  const auto edge = static_cast<std::size_t>(rng.uniform_index(kNumEdges));
  const auto current = static_cast<std::uint64_t>(g.op(edge));
  // Draw from the 4 other ops: shift past the current id.
  std::uint64_t pick = rng.uniform_index(kNumOps - 1);
  if (pick >= current) ++pick;
  return g.with_op(edge, static_cast<OpKind>(pick));
}

std::size_t hamming_distance(const Genotype& a, const Genotype& b) noexcept {
  std::size_t d = 0;
  for (std::size_t e = 0; e < kNumEdges; ++e) d += a.op(e) != b.op(e);
  return d;
}

}  // namespace naswot
