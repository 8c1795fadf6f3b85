#include "naswot/netengine.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "naswot/error.hpp"
#include "naswot/rng.hpp"

namespace naswot {
namespace {

ConvWeights init_conv(Rng& rng, std::size_t in_c, std::size_t out_c, std::size_t k) {
  ConvWeights w{out_c, in_c, k, {}};
  const double stddev = std::sqrt(2.0 / static_cast<double>(w.fan_in()));
  w.values.resize(out_c * w.fan_in());
  for (float& v : w.values) v = static_cast<float>(rng.normal() * stddev);
  return w;
}

ReluConvBn init_rcb(Rng& rng, std::size_t in_c, std::size_t out_c, std::size_t k,
                    std::size_t stride) {
  return ReluConvBn{init_conv(rng, in_c, out_c, k), stride, (k - 1) / 2};
}

std::size_t halve(std::size_t v) { return (v + 1) / 2; }

// Shape propagation shared by build_network and count_relu_units.
std::vector<ReluSite> propagate_sites(const std::vector<Network::Block>& blocks,
                                      std::size_t stem_channels, std::size_t h,
                                      std::size_t w) {
  std::vector<ReluSite> sites;
  std::size_t c = stem_channels;
  std::size_t cell_no = 0;
  std::size_t block_no = 0;
  for (const auto& block : blocks) {
    if (const auto* cell = std::get_if<Cell>(&block)) {
      for (std::size_t e = 0; e < kNumEdges; ++e) {
        if (cell->edges[e].conv) {
          sites.push_back({"cell" + std::to_string(cell_no) + ".edge" + std::to_string(kEdges[e].from) +
                               std::to_string(kEdges[e].to),
                           c, h, w});
        }
      }
      ++cell_no;
    } else {
      const auto& res = std::get<ResidualBlock>(block);
      sites.push_back({"resblock" + std::to_string(block_no) + ".a", c, h, w});
      c = res.conv_a.conv.out_channels;
      h = halve(h);
      w = halve(w);
      sites.push_back({"resblock" + std::to_string(block_no) + ".b", c, h, w});
      ++block_no;
    }
  }
  sites.push_back({"head", c, h, w});
  return sites;
}

// Writes one ReLU site's bits and advances the bit cursor.
class CodeWriter {
 public:
  explicit CodeWriter(ActivationCodeMatrix* codes) : codes_(codes) {}

  void record(const Tensor4& pre, std::string_view site) {
    if (!pre.all_finite()) {
      throw NonFiniteActivation("non-finite activation at ReLU site " + std::string(site));
    }
    if (codes_ == nullptr) return;
    const Shape4& s = pre.shape();
    const std::size_t per_row = s.c * s.plane();
    if (offset_ + per_row > codes_->n_active() || s.n != codes_->rows()) {
      throw std::logic_error("activation code layout does not match the network");
    }
    const auto values = pre.values();
    for (std::size_t n = 0; n < s.n; ++n) {
      const float* row = values.data() + n * per_row;
      for (std::size_t i = 0; i < per_row; ++i) {
        if (row[i] > 0.0f) codes_->set_bit(n, offset_ + i, true);
      }
    }
    offset_ += per_row;
  }

  std::size_t offset() const noexcept { return offset_; }

 private:
  ActivationCodeMatrix* codes_;
  std::size_t offset_ = 0;
};

Tensor4 apply_rcb(const ReluConvBn& layer, const Tensor4& x, double eps, CodeWriter& writer,
                  std::string_view site) {
  writer.record(x, site);
  return batchnorm_batchstats(conv2d(relu(x), layer.conv, layer.stride, layer.padding), eps);
}

Tensor4 run_cell(const Cell& cell, const Tensor4& input, double eps, CodeWriter& writer,
                 const std::vector<ReluSite>& sites, std::size_t& site_idx) {
  std::array<std::optional<Tensor4>, kNumNodes> nodes;
  nodes[0] = input;
  for (int to = 1; to < static_cast<int>(kNumNodes); ++to) {
    Tensor4 sum(input.shape());
    for (int from = 0; from < to; ++from) {
      const CellEdge& edge = cell.edges[edge_index(from, to)];
      const Tensor4& src = *nodes[static_cast<std::size_t>(from)];
      switch (edge.op) {
        case OpKind::kZeroise:
          break;
        case OpKind::kIdentity:
          sum += src;
          break;
        case OpKind::kAvgPool3x3:
          sum += avgpool3x3_same(src);
          break;
        case OpKind::kConv3x3:
        case OpKind::kConv1x1:
          sum += apply_rcb(*edge.conv, src, eps, writer, sites[site_idx++].name);
          break;
      }
    }
    nodes[static_cast<std::size_t>(to)] = std::move(sum);
  }
  return std::move(*nodes[kNumNodes - 1]);
}

Tensor4 run(const Network& net, const Tensor4& batch, CodeWriter& writer,
            std::vector<Tensor4>* cell_outputs) {
  const NetworkConfig& cfg = net.config();
  const double eps = cfg.bn_epsilon;
  const auto& sites = net.relu_sites();
  std::size_t site_idx = 0;

  Tensor4 x = batchnorm_batchstats(conv2d(batch, net.stem(), 1, 1), eps);
  for (const auto& block : net.blocks()) {
    if (const auto* cell = std::get_if<Cell>(&block)) {
      x = run_cell(*cell, x, eps, writer, sites, site_idx);
      if (cell_outputs != nullptr) cell_outputs->push_back(x);
    } else {
      const auto& res = std::get<ResidualBlock>(block);
      Tensor4 a = apply_rcb(res.conv_a, x, eps, writer, sites[site_idx++].name);
      Tensor4 b = apply_rcb(res.conv_b, a, eps, writer, sites[site_idx++].name);
      Tensor4 shortcut = conv2d(avgpool2x2_stride2(x), res.shortcut, 1, 0);
      b += shortcut;
      x = std::move(b);
    }
  }
  x = batchnorm_batchstats(x, eps);
  writer.record(x, sites[site_idx++].name);
  Tensor4 logits = conv2d(global_avgpool(relu(x)), net.classifier(), 1, 0);
  if (!logits.all_finite()) throw NonFiniteActivation("non-finite network output");
  return logits;
}

void check_batch(const Network& net, const Tensor4& batch) {
  const Shape4 expected = net.config().batch_shape(batch.shape().n);
  if (!(batch.shape() == expected)) {
    throw ShapeMismatch("batch shape (" + std::to_string(batch.shape().c) + "," +
                        std::to_string(batch.shape().h) + "," + std::to_string(batch.shape().w) +
                        ") does not match the network input shape (" +
                        std::to_string(expected.c) + "," + std::to_string(expected.h) + "," +
                        std::to_string(expected.w) + ")");
  }
  if (batch.shape().n < 2) throw std::invalid_argument("forward pass needs a batch of >= 2 inputs");
}

}  // namespace

NetworkConfig NetworkConfig::desk() { return NetworkConfig{}; }

NetworkConfig NetworkConfig::full() {
  NetworkConfig cfg;
  cfg.stem_channels = 16;
  cfg.cells_per_stage = 5;
  cfg.input_height = 32;
  cfg.input_width = 32;
  return cfg;
}

void NetworkConfig::validate() const {
  if (stem_channels < 1) throw ConfigError("stem_channels must be >= 1");
  if (cells_per_stage < 1) throw ConfigError("cells_per_stage must be >= 1");
  if (input_channels < 1 || input_height < 1 || input_width < 1) {
    throw ConfigError("input shape dimensions must be >= 1");
  }
  if (num_classes < 1) throw ConfigError("num_classes must be >= 1");
  if (!(bn_epsilon >= 0.0) || !std::isfinite(bn_epsilon)) {
    throw ConfigError("bn_epsilon must be a finite value >= 0");
  }
}

ActivationCodeMatrix::ActivationCodeMatrix(std::size_t rows, std::size_t n_active)
    : rows_(rows),
      n_active_(n_active),
      words_per_row_((n_active + 63) / 64),
      words_(rows * ((n_active + 63) / 64), 0) {}

ActivationCodeMatrix ActivationCodeMatrix::from_strings(std::span<const std::string> rows) {
  const std::size_t len = rows.empty() ? 0 : rows.front().size();
  ActivationCodeMatrix m(rows.size(), len);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != len) throw std::invalid_argument("code rows must have equal length");
    for (std::size_t i = 0; i < len; ++i) {
      const char ch = rows[r][i];
      if (ch != '0' && ch != '1') throw std::invalid_argument("code rows must contain only 0/1");
      m.set_bit(r, i, ch == '1');
    }
  }
  return m;
}

Network build_network(const Genotype& g, const NetworkConfig& cfg) {
  cfg.validate();
  Network net;
  net.genotype_ = g;
  net.config_ = cfg;
  Rng rng(cfg.init_seed);

  std::size_t c = cfg.stem_channels;
  net.stem_ = init_conv(rng, cfg.input_channels, c, 3);
  for (std::size_t stage = 0; stage < NetworkConfig::kStages; ++stage) {
    if (stage > 0) {
      ResidualBlock res;
      res.conv_a = init_rcb(rng, c, 2 * c, 3, 2);
      res.conv_b = init_rcb(rng, 2 * c, 2 * c, 3, 1);
      res.shortcut = init_conv(rng, c, 2 * c, 1);
      net.blocks_.emplace_back(std::move(res));
      c *= 2;
    }
    for (std::size_t i = 0; i < cfg.cells_per_stage; ++i) {
      Cell cell;
      cell.channels = c;
      for (std::size_t e = 0; e < kNumEdges; ++e) {
        cell.edges[e].op = g.op(e);
        if (g.op(e) == OpKind::kConv3x3) cell.edges[e].conv = init_rcb(rng, c, c, 3, 1);
        if (g.op(e) == OpKind::kConv1x1) cell.edges[e].conv = init_rcb(rng, c, c, 1, 1);
      }
      net.blocks_.emplace_back(std::move(cell));
    }
  }
  net.classifier_ = init_conv(rng, c, cfg.num_classes, 1);
  net.sites_ = propagate_sites(net.blocks_, cfg.stem_channels, cfg.input_height, cfg.input_width);
  return net;
}

Tensor4 Network::forward(const Tensor4& batch, ActivationCodeMatrix* codes) const {
  check_batch(*this, batch);
  CodeWriter writer(codes);
  return run(*this, batch, writer, nullptr);
}

std::vector<Tensor4> Network::cell_outputs(const Tensor4& batch) const {
  check_batch(*this, batch);
  std::vector<Tensor4> outputs;
  CodeWriter writer(nullptr);
  run(*this, batch, writer, &outputs);
  return outputs;
}

ActivationCodeMatrix forward_collect_codes(const Network& net, const Tensor4& batch) {
  ActivationCodeMatrix codes(batch.shape().n, count_relu_units(net));
  net.forward(batch, &codes);
  return codes;
}

std::size_t count_relu_units(const Network& net, std::size_t channels, std::size_t height,
                             std::size_t width) {
  if (channels != net.config().input_channels) {
    throw ShapeMismatch("input channel count does not match the network stem");
  }
  const auto sites = propagate_sites(net.blocks(), net.config().stem_channels, height, width);
  return std::accumulate(sites.begin(), sites.end(), std::size_t{0},
                         [](std::size_t acc, const ReluSite& s) { return acc + s.units(); });
}

std::size_t count_relu_units(const Network& net) {
  const auto& cfg = net.config();
  return count_relu_units(net, cfg.input_channels, cfg.input_height, cfg.input_width);
}

}  // namespace naswot
