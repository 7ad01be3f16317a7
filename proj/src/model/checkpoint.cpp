#include "vgforge/model/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "vgforge/error.hpp"
#include "vgforge/image_io.hpp"

namespace vgforge::model {

namespace {

constexpr char kMagic[4] = {'V', 'G', 'C', 'K'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : b_(b) {}

  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw IoError("checkpoint truncated at byte " + std::to_string(pos_));
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_++]) << (8 * i);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b_[pos_++]) << (8 * i);
    return std::bit_cast<double>(v);
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const EncoderParams& params) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put_u32(out, kCheckpointVersion);
  const std::string cfg = to_json(params.config()).dump();
  put_u32(out, static_cast<std::uint32_t>(cfg.size()));
  out.insert(out.end(), cfg.begin(), cfg.end());
  put_u32(out, static_cast<std::uint32_t>(params.tensors().size()));
  for (const auto& t : params.tensors()) {
    put_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out.insert(out.end(), t.name.begin(), t.name.end());
    put_u32(out, static_cast<std::uint32_t>(t.value.rows()));
    put_u32(out, static_cast<std::uint32_t>(t.value.cols()));
    for (Eigen::Index i = 0; i < t.value.size(); ++i) put_f64(out, t.value.data()[i]);
  }
  return out;
}

EncoderParams decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  if (r.bytes(4) != std::string(kMagic, 4)) throw IoError("not a checkpoint (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) throw IoError("unsupported checkpoint version " + std::to_string(version));
  EncoderConfig cfg;
  try {
    cfg = encoder_config_from_json(nlohmann::json::parse(r.bytes(r.u32())));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("checkpoint config is malformed: ") + e.what());
  } catch (const InvalidParameter& e) {
    throw IoError(std::string("checkpoint config is invalid: ") + e.what());
  }
  const std::uint32_t count = r.u32();
  std::vector<Tensor> tensors;
  for (std::uint32_t k = 0; k < count; ++k) {
    Tensor t;
    t.name = r.bytes(r.u32());
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    r.need(static_cast<std::size_t>(rows) * cols * 8);
    t.value.resize(rows, cols);
    for (Eigen::Index i = 0; i < t.value.size(); ++i) t.value.data()[i] = r.f64();
    tensors.push_back(std::move(t));
  }
  if (!r.done()) throw IoError("checkpoint has trailing bytes");
  try {
    return EncoderParams::from_tensors(cfg, std::move(tensors));
  } catch (const InvalidParameter& e) {
    throw IoError(std::string("checkpoint layout mismatch: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const EncoderParams& params) {
  write_file_atomic(path, encode_checkpoint(params));
}

EncoderParams load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

}  // namespace vgforge::model
