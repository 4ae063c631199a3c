#include "noisecollage/unet.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "noisecollage/error.hpp"
#include "noisecollage/geometry.hpp"
#include "noisecollage/noise.hpp"
#include "noisecollage/numerics.hpp"

namespace noisecollage {

using namespace unet;
namespace nx = numerics;

namespace {

constexpr char kMagic[4] = {'N', 'C', 'U', 'W'};
constexpr std::uint64_t kInitStreamBase = 1000;
constexpr std::size_t kMaxNameLength = 256;
constexpr std::uint32_t kMaxRank = 8;

Shape conv_shape(std::size_t out, std::size_t in) { return {out, in, 3, 3}; }

}  // namespace

std::vector<std::pair<std::string, Shape>> unet_parameter_layout() {
  const std::size_t in_ch = kImageChannels + kHintChannels;
  return {
      {"attn.bo", {kAttentionDim}},
      {"attn.norm.gain", {kAttentionDim}},
      {"attn.norm.shift", {kAttentionDim}},
      {"attn.wk", {kAttentionDim, kAttentionDim}},
      {"attn.wo", {kAttentionDim, kAttentionDim}},
      {"attn.wq", {kAttentionDim, kAttentionDim}},
      {"attn.wv", {kAttentionDim, kAttentionDim}},
      {"down.b", {kInnerChannels}},
      {"down.w", conv_shape(kInnerChannels, kStemChannels)},
      {"head.b", {kImageChannels}},
      {"head.w", conv_shape(kImageChannels, kStemChannels)},
      {"res16.conv1.b", {kInnerChannels}},
      {"res16.conv1.w", conv_shape(kInnerChannels, kInnerChannels)},
      {"res16.conv2.b", {kInnerChannels}},
      {"res16.conv2.w", conv_shape(kInnerChannels, kInnerChannels)},
      {"res16.temb.b", {kInnerChannels}},
      {"res16.temb.w", {kTimeEmbedDim, kInnerChannels}},
      {"res32.conv1.b", {kStemChannels}},
      {"res32.conv1.w", conv_shape(kStemChannels, kStemChannels)},
      {"res32.conv2.b", {kStemChannels}},
      {"res32.conv2.w", conv_shape(kStemChannels, kStemChannels)},
      {"res32.temb.b", {kStemChannels}},
      {"res32.temb.w", {kTimeEmbedDim, kStemChannels}},
      {"stem.b", {kStemChannels}},
      {"stem.w", conv_shape(kStemChannels, in_ch)},
      {"time.b1", {kTimeEmbedDim}},
      {"time.w1", {kTimeEmbedDim, kTimeEmbedDim}},
      {"token.embedding", {kVocabularySize, kAttentionDim}},
      {"up.b", {kStemChannels}},
      {"up.w", conv_shape(kStemChannels, kInnerChannels)},
  };
}

const Tensor& UNetWeights::get(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw Error(ErrorKind::kConfig, "missing UNet parameter '" + name + "'");
  return it->second;
}

UNetWeights init_weights(std::uint64_t seed) {
  const NoiseSource rng(seed);
  UNetWeights w;
  std::uint64_t stream = kInitStreamBase;
  for (const auto& [name, shape] : unet_parameter_layout()) {
    Tensor t(shape);
    const bool is_bias = name.ends_with(".b") || name.ends_with(".b1") || name == "attn.bo" ||
                         name.ends_with(".shift");
    if (name.ends_with(".gain")) {
      t = Tensor(shape, 1.0);
    } else if (!is_bias) {
      double bound = 1.0;
      if (shape.size() == 4) bound = 1.0 / std::sqrt(static_cast<double>(shape[1] * 9));
      else if (name != "token.embedding") bound = 1.0 / std::sqrt(static_cast<double>(shape[0]));
      for (std::size_t i = 0; i < t.size(); ++i) t[i] = bound * (2.0 * rng.uniform(stream, 0, i) - 1.0);
    }
    w.tensors.emplace(name, std::move(t));
    ++stream;
  }
  return w;
}

namespace {

class Writer {
 public:
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
  }
  std::vector<std::uint8_t> out;

 private:
  void le(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const noexcept { return pos_; }
  std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(le(4, what)); }
  std::uint64_t u64(const char* what) { return le(8, what); }
  double f64(const char* what) { return std::bit_cast<double>(le(8, what)); }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool at_end() const noexcept { return pos_ == bytes_.size(); }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorKind::kFormat, std::string("truncated while reading ") + what, pos_);
    }
  }
  std::uint64_t le(int n, const char* what) {
    need(static_cast<std::size_t>(n), what);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> save_weights(const UNetWeights& weights) {
  Writer w;
  w.raw(kMagic, 4);
  w.u32(kWeightFormatVersion);
  w.u32(static_cast<std::uint32_t>(weights.tensors.size()));
  for (const auto& [name, t] : weights.tensors) {
    w.u32(static_cast<std::uint32_t>(name.size()));
    w.raw(name.data(), name.size());
    w.u32(static_cast<std::uint32_t>(t.rank()));
    for (auto e : t.shape()) w.u64(e);
    for (double v : t.values()) w.f64(v);
  }
  return std::move(w.out);
}

UNetWeights load_weights(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const std::string magic = r.str(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw Error(ErrorKind::kFormat, "bad magic, expected NCUW", 0);
  const std::size_t version_at = r.offset();
  const std::uint32_t version = r.u32("version");
  if (version != kWeightFormatVersion) {
    throw Error(ErrorKind::kFormat, "unsupported version " + std::to_string(version), version_at);
  }
  const std::uint32_t count = r.u32("section count");
  UNetWeights out;
  for (std::uint32_t s = 0; s < count; ++s) {
    const std::size_t section_at = r.offset();
    const std::uint32_t name_len = r.u32("section name length");
    if (name_len == 0 || name_len > kMaxNameLength) {
      throw Error(ErrorKind::kFormat, "bad section name length " + std::to_string(name_len), section_at);
    }
    std::string name = r.str(name_len, "section name");
    const std::size_t rank_at = r.offset();
    const std::uint32_t rank = r.u32("rank");
    if (rank == 0 || rank > kMaxRank) throw Error(ErrorKind::kFormat, "bad rank " + std::to_string(rank), rank_at);
    Shape shape;
    std::size_t volume = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      const std::size_t extent_at = r.offset();
      const std::uint64_t e = r.u64("extent");
      if (e == 0 || e > r.remaining() || volume > r.remaining() / e) {
        throw Error(ErrorKind::kFormat, "extent " + std::to_string(e) + " exceeds the file", extent_at);
      }
      volume *= e;
      shape.push_back(e);
    }
    std::vector<double> values(volume);
    for (auto& v : values) v = r.f64("tensor values");
    if (!out.tensors.emplace(name, Tensor(std::move(shape), std::move(values))).second) {
      throw Error(ErrorKind::kFormat, "duplicate section '" + name + "'", section_at);
    }
  }
  if (!r.at_end()) throw Error(ErrorKind::kFormat, "trailing bytes after last section", r.offset());
  return out;
}

Tensor timestep_embedding(double t, std::size_t dim) {
  const std::size_t half = dim / 2;
  Tensor out({1, dim});
  const double log_base = std::log(10000.0) / static_cast<double>(half);
  for (std::size_t i = 0; i < half; ++i) {
    const double angle = t * std::exp(-static_cast<double>(i) * log_base);
    out[i] = std::cos(angle);
    out[i + half] = std::sin(angle);
  }
  return out;
}

UNetEstimator::UNetEstimator(UNetWeights weights) : weights_(std::move(weights)) {
  for (const auto& [name, shape] : unet_parameter_layout()) {
    const Tensor& t = weights_.get(name);
    if (t.shape() != shape) {
      throw Error(ErrorKind::kConfig, "UNet parameter '" + name + "' has shape " + shape_string(t.shape()) +
                                          ", expected " + shape_string(shape));
    }
  }
}

namespace {

Tensor embed_tokens(const Condition* cond, const Tensor& table) {
  std::vector<std::size_t> ids;
  if (cond != nullptr) {
    if (const auto* tok = std::get_if<TokenCondition>(cond)) {
      ids = tok->ids;
    } else if (!is_empty(*cond)) {
      throw Error(ErrorKind::kConfig, "UNet estimator needs token or empty conditions");
    }
  }
  if (ids.empty()) ids.push_back(kNullToken);
  Tensor out({ids.size(), kAttentionDim});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] >= kVocabularySize) throw Error(ErrorKind::kConfig, "token id " + std::to_string(ids[r]) + " out of range");
    for (std::size_t j = 0; j < kAttentionDim; ++j) out.at(r, j) = table.at(ids[r], j);
  }
  return out;
}

Tensor residual_block(const Tensor& x, const Tensor& temb, const UNetWeights& w, const std::string& prefix) {
  Tensor h = nx::conv2d(nx::silu(x), w.get(prefix + ".conv1.w"), w.get(prefix + ".conv1.b"));
  const Tensor tproj = nx::linear(temb, w.get(prefix + ".temb.w"), w.get(prefix + ".temb.b"));
  h = nx::add_channel_bias(h, tproj.reshaped({tproj.size()}));
  h = nx::conv2d(nx::silu(h), w.get(prefix + ".conv2.w"), w.get(prefix + ".conv2.b"));
  return nx::add(x, h);
}

}  // namespace

Tensor UNetEstimator::estimate(const EstimatorRequest& req) const { return forward(req, {}); }

Tensor UNetEstimator::forward(const EstimatorRequest& req, const UNetForwardOptions& opts) const {
  if (req.x_t == nullptr) throw Error(ErrorKind::kConfig, "estimator request without x_t");
  const Shape canvas_shape{kImageChannels, kCanvas, kCanvas};
  if (req.x_t->shape() != canvas_shape) {
    throw Error(ErrorKind::kShape, "UNet expects x_t " + shape_string(canvas_shape) + ", got " +
                                       shape_string(req.x_t->shape()));
  }
  const bool object = req.branch == Branch::kObject;
  if (object && req.mask == nullptr) throw Error(ErrorKind::kConfig, "object-branch UNet call without a mask pyramid");

  const UNetWeights& w = weights_;
  Tensor hint(Shape{kHintChannels, kCanvas, kCanvas});
  if (req.hint != nullptr) {
    if (req.hint->values.shape() != Shape{kHintChannels, kCanvas, kCanvas}) {
      throw Error(ErrorKind::kShape, "UNet hint must be " + shape_string({kHintChannels, kCanvas, kCanvas}));
    }
    const std::size_t plane = kCanvas * kCanvas;
    for (std::size_t c = 0; c < kHintChannels; ++c)
      for (std::size_t p = 0; p < plane; ++p)
        if (req.hint->active.at_index(p)) hint[c * plane + p] = req.hint->values[c * plane + p];
  }

  const Tensor temb = nx::silu(nx::linear(timestep_embedding(static_cast<double>(req.t), kTimeEmbedDim),
                                          w.get("time.w1"), w.get("time.b1")));
  const Tensor stem = nx::conv2d(nx::concat_channels(*req.x_t, hint), w.get("stem.w"), w.get("stem.b"));
  const Tensor skip = residual_block(stem, temb, w, "res32");
  const Tensor down = nx::conv2d(nx::avg_pool2(skip), w.get("down.w"), w.get("down.b"));
  const Tensor inner = residual_block(down, temb, w, "res16");

  // Attention block on pixel rows of the 16 x 16 feature map.
  const Tensor rows = nx::image_to_rows(inner);
  const Tensor normed = nx::layer_norm(rows, w.get("attn.norm.gain"), w.get("attn.norm.shift"));
  const Tensor q = nx::matmul(normed, w.get("attn.wq"));
  const Tensor& table = w.get("token.embedding");
  const Tensor tokens = embed_tokens(req.condition, table);
  const Tensor k = nx::matmul(tokens, w.get("attn.wk"));
  const Tensor v = nx::matmul(tokens, w.get("attn.wv"));

  Tensor attended;
  if (object && !opts.force_standard_attention) {
    const Tensor glob_tokens = embed_tokens(req.global_condition, table);
    const Tensor k_glob = nx::matmul(glob_tokens, w.get("attn.wk"));
    const Tensor v_glob = nx::matmul(glob_tokens, w.get("attn.wv"));
    const Mask& level = req.mask->level({kAttentionSide, kAttentionSide});
    attended = masked_cross_attention(q, mask_to_rows(level), k, v, k_glob, v_glob, opts.mode);
  } else {
    attended = cross_attention(q, k, v);
  }
  const Tensor block_out = nx::add(rows, nx::linear(attended, w.get("attn.wo"), w.get("attn.bo")));
  if (opts.attention_tap != nullptr) *opts.attention_tap = block_out;

  const Tensor mid = nx::rows_to_image(block_out, kAttentionSide, kAttentionSide);
  const Tensor up = nx::add(nx::conv2d(nx::upsample_nearest2(mid), w.get("up.w"), w.get("up.b")), skip);
  return nx::conv2d(nx::silu(up), w.get("head.w"), w.get("head.b"));
}

}  // namespace noisecollage
