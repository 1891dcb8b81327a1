#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cstring>
#include <fstream>

#include "f2v/core/errors.hpp"
#include "f2v/ingest/dataset.hpp"
#include "f2v/ingest/flo.hpp"
#include "f2v/ingest/samples.hpp"
#include "f2v/synth/synth.hpp"
#include "helpers.hpp"

using namespace f2v;
using testutil::TempDir;
namespace fs = std::filesystem;

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::ofstream& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

Clip palette_clip(const std::string& id, int frames, int size, bool labelled) {
  const auto pal = ClassPalette::default_palette();
  Clip c;
  c.clip_id = id;
  for (int t = 0; t < frames; ++t) {
    ClassMap m(size, size, 0);
    m.at(t % size, (2 * t) % size) = 1 + t % 3;
    c.frames.push_back(colorize(m, pal, t));
  }
  for (int t = 0; t + 1 < frames; ++t) c.flows.push_back(FlowField(size, size, 2.0f, 4.0f));
  if (labelled) {
    c.labels = std::vector<int>(static_cast<std::size_t>(frames), 0);
    (*c.labels).back() = 1;
  }
  return c;
}

}  // namespace

TEST_CASE("write_flo / read_flo round trip") {
  TempDir dir("flo");
  const auto p = dir.path / "a.flo";
  write_flo(p, testutil::uniform_flow(4, 4, 1.0f, 2.0f));
  const auto f = read_flo(p);
  CHECK(f.height == 4);
  CHECK(f.width == 4);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(f.u[i] == 1.0f);
    CHECK(f.v[i] == 2.0f);
  }
}

TEST_CASE("read_flo parses a hand-built minimal file") {
  TempDir dir("flo");
  const auto p = dir.path / "min.flo";
  {
    std::ofstream out(p, std::ios::binary);
    out.write("PIEH", 4);
    put_u32(out, 1);
    put_u32(out, 1);
    put_f32(out, 0.0f);
    put_f32(out, 0.0f);
  }
  const auto f = read_flo(p);
  CHECK(f.width == 1);
  CHECK(f.height == 1);
  CHECK(f.u[0] == 0.0f);
  CHECK(f.v[0] == 0.0f);

  // interleaved row-major (u, v) with width 2, height 1
  {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write("PIEH", 4);
    put_u32(out, 2);
    put_u32(out, 1);
    for (float v : {1.5f, -2.0f, 3.0f, 4.25f}) put_f32(out, v);
  }
  const auto g = read_flo(p);
  CHECK(g.u == std::vector<float>{1.5f, 3.0f});
  CHECK(g.v == std::vector<float>{-2.0f, 4.25f});
}

TEST_CASE("read_flo format errors carry byte offsets") {
  TempDir dir("flo");
  const auto p = dir.path / "bad.flo";
  {
    std::ofstream out(p, std::ios::binary);
    out.write("XXXX", 4);
    put_u32(out, 1);
    put_u32(out, 1);
    put_f32(out, 0);
    put_f32(out, 0);
  }
  try {
    read_flo(p);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("offset 0") != std::string::npos);
  }
  {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write("PIEH", 4);
    put_u32(out, 2);
    put_u32(out, 2);
    put_f32(out, 0);
  }
  try {
    read_flo(p);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("offset") != std::string::npos);
  }
  CHECK_THROWS_AS(read_flo(dir.path / "missing.flo"), LoadError);
}

TEST_CASE("property: write_flo then read_flo is identity on finite fields") {
  TempDir dir("flo");
  std::mt19937 gen(4);
  std::normal_distribution<float> n(0.0f, 10.0f);
  for (int trial = 0; trial < 10; ++trial) {
    FlowField f(3 + trial, 5 + trial % 3);
    for (auto& v : f.u) v = n(gen);
    for (auto& v : f.v) v = n(gen);
    write_flo(dir.path / "r.flo", f);
    CHECK(read_flo(dir.path / "r.flo") == f);
  }
}

TEST_CASE("make_training_samples counts") {
  CHECK(make_training_samples(testutil::gray_clip("a", 13, 4), 10).size() == 2);
  CHECK(make_training_samples(testutil::gray_clip("a", 12, 4), 10).size() == 1);
  CHECK(make_training_samples(testutil::gray_clip("a", 11, 4), 10).empty());
  CHECK(initial_frame_indices(13, 10) == std::vector<int>{1, 2});
}

TEST_CASE("training samples use flow[t-1] and contiguous later targets") {
  Clip c = testutil::gray_clip("a", 15, 4);
  for (int t = 0; t < 15; ++t) std::fill(c.frames[t].image.data.begin(), c.frames[t].image.data.end(), t / 20.0f);
  for (int t = 0; t < 14; ++t) c.flows[t] = testutil::uniform_flow(4, 4, static_cast<float>(t + 1), 0.0f);
  const auto samples = make_training_samples(c, 3);
  REQUIRE(samples.size() == 11);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const int t = static_cast<int>(i) + 1;
    CHECK(samples[i].initial.frame_index == t);
    CHECK(samples[i].flow.u[0] == static_cast<float>(t));  // flow[t-1] stores t
    CHECK(samples[i].direction.c0[0] == 1.0f);
    REQUIRE(samples[i].target.num_frames() == 3);
    for (int k = 0; k < 3; ++k) CHECK(samples[i].target.frames[k].data[0] == doctest::Approx((t + 1 + k) / 20.0f));
  }
}

TEST_CASE("load_dataset reproduces synth checksums") {
  TempDir dir("ds");
  Benchmark b = default_benchmark(3, 32);
  b.train.num_clips = 2;
  b.test.resize(2);  // normal + novel_class
  b.test[0].num_clips = 1;
  b.test[1].num_clips = 2;
  const Manifest m = gen_dataset(b, dir.path);
  const auto train = load_dataset(dir.path, Split::train, 32);
  const auto test = load_dataset(dir.path, Split::test, 32);
  REQUIRE(train.clips.size() == 2);
  REQUIRE(test.clips.size() == 3);
  std::map<std::string, std::uint64_t> sums;
  for (const auto& c : m.clips) sums[c.clip_id] = c.checksum;
  for (const auto* ds : {&train, &test}) {
    for (const auto& c : ds->clips) CHECK(clip_checksum(c) == sums.at(c.clip_id));
  }
  for (const auto& c : train.clips) CHECK(!c.labels);
  for (const auto& c : test.clips) {
    REQUIRE(c.labels);
    CHECK(c.labels->size() == c.frames.size());
    CHECK(c.flows.size() + 1 == c.frames.size());
  }
  CHECK(train.palette.size() == ClassPalette::default_palette().size());
}

TEST_CASE("length contract: 30 frames -> 29 flows, 30 labels") {
  TempDir dir("ds");
  write_palette_json(dir.path / "palette.json", ClassPalette::default_palette());
  write_clip(dir.path, Split::test, palette_clip("c30", 30, 8, true));
  const auto ds = load_dataset(dir.path, Split::test, 8);
  REQUIRE(ds.clips.size() == 1);
  CHECK(ds.clips[0].frames.size() == 30);
  CHECK(ds.clips[0].flows.size() == 29);
  CHECK(ds.clips[0].labels->size() == 30);
  for (int t = 0; t < 30; ++t) CHECK(ds.clips[0].frames[t].frame_index == t);
}

TEST_CASE("resizing halves flow vectors and keeps palette colors") {
  TempDir dir("ds");
  write_palette_json(dir.path / "palette.json", ClassPalette::default_palette());
  write_clip(dir.path, Split::train, palette_clip("big", 4, 16, false));
  const auto ds = load_dataset(dir.path, Split::train, 8);
  const auto& c = ds.clips[0];
  CHECK(c.frames[0].height() == 8);
  CHECK(c.flows[0].height == 8);
  for (std::size_t i = 0; i < c.flows[0].size(); ++i) {
    CHECK(c.flows[0].u[i] == doctest::Approx(1.0f));
    CHECK(c.flows[0].v[i] == doctest::Approx(2.0f));
  }
  const auto pal = ClassPalette::default_palette();
  for (const auto& f : c.frames) {
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) {
        Color col{f.image.at(0, y, x), f.image.at(1, y, x), f.image.at(2, y, x)};
        CHECK(pal.entries()[pal.nearest(col)].color == col);
      }
    }
  }
}

TEST_CASE("load errors name the clip and the file") {
  TempDir dir("ds");
  write_palette_json(dir.path / "palette.json", ClassPalette::default_palette());
  write_clip(dir.path, Split::test, palette_clip("broken", 6, 8, true));
  const auto clip_dir = dir.path / "test" / "broken";
  fs::remove(clip_dir / "flow" / "000003.flo");
  try {
    load_dataset(dir.path, Split::test, 8);
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("broken") != std::string::npos);
    CHECK(msg.find("flow") != std::string::npos);
  }
  write_flo(clip_dir / "flow" / "000003.flo", FlowField(8, 8));
  {
    std::ofstream out(clip_dir / "labels.csv", std::ios::trunc);
    out << "frame_index,label\n0,0\n1,7\n";
  }
  try {
    load_dataset(dir.path, Split::test, 8);
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    CHECK(std::string(e.what()).find("labels.csv") != std::string::npos);
  }
  fs::remove(clip_dir / "labels.csv");
  CHECK_THROWS_AS(load_dataset(dir.path, Split::test, 8), LoadError);
}

TEST_CASE("frame/flow count mismatch is a load error") {
  TempDir dir("ds");
  write_palette_json(dir.path / "palette.json", ClassPalette::default_palette());
  write_clip(dir.path, Split::train, palette_clip("extra", 5, 8, false));
  write_flo(dir.path / "train" / "extra" / "flow" / "000004.flo", FlowField(8, 8));
  CHECK_THROWS_AS(load_dataset(dir.path, Split::train, 8), LoadError);
}

TEST_CASE("property: load_dataset is deterministic") {
  TempDir dir("ds");
  write_palette_json(dir.path / "palette.json", ClassPalette::default_palette());
  write_clip(dir.path, Split::train, palette_clip("b", 6, 8, false));
  write_clip(dir.path, Split::train, palette_clip("a", 5, 8, false));
  const auto x = load_dataset(dir.path, Split::train, 8);
  const auto y = load_dataset(dir.path, Split::train, 8);
  REQUIRE(x.clips.size() == 2);
  CHECK(x.clips[0].clip_id == "a");  // lexicographic clip order
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(x.clips[i].frames == y.clips[i].frames);
    CHECK(x.clips[i].flows == y.clips[i].flows);
  }
}

TEST_CASE("palette json and labels csv round trip") {
  TempDir dir("ds");
  write_palette_json(dir.path / "p.json", ClassPalette::default_palette());
  const auto p = read_palette_json(dir.path / "p.json");
  REQUIRE(p.size() == 8);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(p.entries()[i].class_id == ClassPalette::default_palette().entries()[i].class_id);
    CHECK(p.entries()[i].color == ClassPalette::default_palette().entries()[i].color);
  }
  const std::vector<int> labels{0, 0, 1, 1, 0};
  write_labels_csv(dir.path / "l.csv", labels);
  CHECK(read_labels_csv(dir.path / "l.csv") == labels);
  CHECK(testutil::read_bytes(dir.path / "l.csv").rfind("frame_index,label\n0,0\n", 0) == 0);
}
