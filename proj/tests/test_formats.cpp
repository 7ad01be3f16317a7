#include <gtest/gtest.h>

#include <cstring>
#include <fstream>

#include "support/fixtures.hpp"
#include "vgforge/digest.hpp"
#include "vgforge/error.hpp"
#include "vgforge/image_io.hpp"
#include "vgforge/manifest.hpp"
#include "vgforge/pcb.hpp"
#include "vgforge/verify.hpp"

using namespace vgforge;
using namespace vgforge::dataset;

TEST(Pcb, ByteLayout) {
  const PointCloud pc{{{1.0, -2.0, 0.5}}};
  const auto bytes = pcb::encode(pc);
  const std::vector<std::uint8_t> want{'V', 'G', 'P', 'C', 1, 0, 0, 0, 1, 0, 0, 0,
                                       0x00, 0x00, 0x80, 0x3f,   // 1.0f
                                       0x00, 0x00, 0x00, 0xc0,   // -2.0f
                                       0x00, 0x00, 0x00, 0x3f};  // 0.5f
  EXPECT_EQ(bytes, want);
}

TEST(Pcb, RoundTripIsFloat32) {
  PointCloud pc{{{0.1, 0.2, 0.3}, {-1.0, 1.0, 0.0}}};
  const auto back = pcb::decode(pcb::encode(pc));
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i)
    for (int a = 0; a < 3; ++a) EXPECT_EQ(back.points[i][a], static_cast<double>(static_cast<float>(pc.points[i][a])));
  EXPECT_EQ(pcb::encode(back), pcb::encode(pc));
}

TEST(Pcb, RejectsMalformedInput) {
  auto bytes = pcb::encode(PointCloud{{{1, 2, 3}}});
  EXPECT_THROW(pcb::decode(std::span(bytes.data(), 5)), IoError);
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(pcb::decode(bad), IoError);
  bad = bytes;
  bad[4] = 2;
  EXPECT_THROW(pcb::decode(bad), IoError);
  bad = bytes;
  bad.pop_back();
  EXPECT_THROW(pcb::decode(bad), IoError);
  try {
    pcb::read("/nonexistent/dir/x.pcb");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/x.pcb"), std::string::npos);
  }
}

TEST(Png, HeaderIsRgb8AndRoundTrips) {
  projection::FractalImage img(224, 224);
  img.set_white(0, 0);
  img.set_white(112, 112);
  img.set_white(223, 5);
  const auto bytes = encode_png(img);
  const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  ASSERT_GT(bytes.size(), 33u);
  EXPECT_EQ(std::memcmp(bytes.data(), sig, 8), 0);
  EXPECT_EQ(std::memcmp(bytes.data() + 12, "IHDR", 4), 0);
  auto be32 = [&](std::size_t at) {
    return (std::uint32_t{bytes[at]} << 24) | (std::uint32_t{bytes[at + 1]} << 16) | (std::uint32_t{bytes[at + 2]} << 8) |
           std::uint32_t{bytes[at + 3]};
  };
  EXPECT_EQ(be32(16), 224u);
  EXPECT_EQ(be32(20), 224u);
  EXPECT_EQ(bytes[24], 8);  // bit depth
  EXPECT_EQ(bytes[25], 2);  // colour type RGB
  EXPECT_EQ(bytes[28], 0);  // no interlace
  const auto back = decode_png(bytes);
  EXPECT_EQ(back, img);
  EXPECT_EQ(encode_png(back), bytes);
}

TEST(Png, RejectsGarbage) {
  const std::vector<std::uint8_t> junk{1, 2, 3, 4, 5, 6, 7, 8, 9};
  EXPECT_THROW(decode_png(junk), IoError);
  auto bytes = encode_png(projection::FractalImage(4, 4));
  bytes.resize(bytes.size() / 2);
  EXPECT_THROW(decode_png(bytes), IoError);
}

TEST(Digest, KnownVectors) {
  EXPECT_EQ(sha256_hex(std::string_view("")), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex(std::string_view("abc")), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

namespace {

DatasetManifest synthetic(std::size_t C, std::size_t M) {
  DatasetManifest m;
  m.name = "synthetic";
  m.C = C;
  m.M = M;
  m.global_seed = 77;
  m.total_attempts = C + 3;
  for (std::size_t c = 0; c < C; ++c) {
    CategoryRecord cat;
    cat.id = static_cast<int>(c);
    cat.category_seed = 1000 + c;
    cat.attempts = 1;
    cat.canonical_run_seed = 0xFFFFFFFFFFFFFFF0ULL + c;
    cat.variance = {0.1, 0.2, 0.3 + c};
    m.categories.push_back(cat);
  }
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t i = 0; i < M; ++i) {
      InstanceRecord r;
      r.category_id = r.image_label = r.cloud_label = static_cast<int>(c);
      r.instance_id = static_cast<int>(i);
      r.point_cloud_path = cloud_relpath(r.category_id, r.instance_id);
      r.image_path = image_relpath(r.category_id, r.instance_id);
      r.camera.eye = {0.1, 0.2, 2.4};
      r.camera.sphere_radius = 2.5;
      r.mix_donor_category = static_cast<int>((c + 1) % C);
      r.seeds = {c, i, c * i, 0xFFFFFFFFFFFFFFFFULL};
      r.pcb_sha256 = std::string(64, 'a');
      r.png_sha256 = std::string(64, 'b');
      m.records.push_back(r);
    }
  return m;
}

}  // namespace

TEST(Manifest, JsonRoundTripIsExact) {
  auto m = synthetic(3, 4);
  m.shuffle = ShuffleInfo{"category", 9};
  const auto text = serialize(m);
  const auto back = manifest_from_json(nlohmann::json::parse(text));
  EXPECT_EQ(serialize(back), text);
  EXPECT_EQ(back.records[5].seeds, m.records[5].seeds);
  EXPECT_EQ(back.categories[2].canonical_run_seed, 0xFFFFFFFFFFFFFFF2ULL);
  EXPECT_EQ(manifest_digest(back), manifest_digest(m));
  EXPECT_EQ(manifest_digest(m), sha256_hex(text));
  EXPECT_EQ(text.back(), '\n');
  const auto j = nlohmann::json::parse(text);
  EXPECT_EQ(j["N"], 12);
  EXPECT_EQ(j["format_version"], 1);
  EXPECT_EQ(j["records"][0]["point_cloud_path"], "clouds/0/0.pcb");
}

TEST(Manifest, RejectsUnsupportedVersionAndMissingFields) {
  auto j = nlohmann::json::parse(serialize(synthetic(2, 2)));
  j["format_version"] = 2;
  EXPECT_THROW(manifest_from_json(j), InvalidParameter);
  j = nlohmann::json::parse(serialize(synthetic(2, 2)));
  j.erase("records");
  EXPECT_THROW(manifest_from_json(j), InvalidParameter);
  fixture::TempDir dir("manifest");
  std::ofstream(dir / "bad.json") << "{ not json";
  EXPECT_THROW(read_manifest(dir / "bad.json"), IoError);
  EXPECT_THROW(read_manifest(dir / "absent.json"), IoError);
}

TEST(Manifest, WriteReadRoundTrip) {
  fixture::TempDir dir("manifest-rt");
  const auto m = synthetic(2, 3);
  write_manifest(dir / "manifest.json", m);
  EXPECT_EQ(serialize(read_manifest(dir / "manifest.json")), serialize(m));
  EXPECT_EQ(sha256_file(dir / "manifest.json"), manifest_digest(m));
}

TEST(LabelStream, IterationOrderMatchesIndependentComputation) {
  // Orders and digest computed by a separate Python implementation.
  EXPECT_EQ(iteration_order(10, 0), (std::vector<std::size_t>{2, 4, 6, 8, 5, 1, 7, 0, 9, 3}));
  EXPECT_EQ(iteration_order(7, 5), (std::vector<std::size_t>{3, 4, 2, 5, 0, 1, 6}));
  DatasetManifest m;
  for (int i = 0; i < 7; ++i) {
    InstanceRecord r;
    r.category_id = i % 3;
    m.records.push_back(r);
  }
  EXPECT_EQ(label_stream_digest(m, 5), "ca1d072fa1ee65068bb0ab7549200e30fc8d6901a21b32717023ea730c041378");
}

TEST(LabelStream, OrderIsAPermutation) {
  auto o = iteration_order(1000, 42);
  std::sort(o.begin(), o.end());
  for (std::size_t i = 0; i < o.size(); ++i) EXPECT_EQ(o[i], i);
  EXPECT_NE(iteration_order(100, 1), iteration_order(100, 2));
}
