#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "surmr/error.hpp"
#include "surmr/io/checkpoint.hpp"
#include "surmr/io/csv.hpp"
#include "surmr/io/formats.hpp"
#include "surmr/io/image.hpp"

using namespace surmr;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void expect_error(const std::function<void()>& fn, const std::string& needle) {
  try {
    fn();
    ADD_FAILURE() << "expected error containing '" << needle << "'";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(Csv, ParsesQuotesAndCrlf) {
  std::istringstream in("a,b,c\r\n1,\"x,y\",\"he said \"\"hi\"\"\"\r\n2,,z\n");
  const auto t = io::CsvTable::parse(in, "mem", {"a", "c"});
  ASSERT_EQ(t.rows().size(), 2u);
  EXPECT_EQ(t.field(t.rows()[0], "b"), "x,y");
  EXPECT_EQ(t.field(t.rows()[0], "c"), "he said \"hi\"");
  EXPECT_EQ(t.field(t.rows()[1], "b"), "");
  EXPECT_EQ(t.rows()[1].line, 3u);
  EXPECT_EQ(t.integer(t.rows()[1], "a"), 2);
}

TEST(Csv, ErrorsCarryLineNumbers) {
  std::istringstream missing("a,b\n1,2\n");
  expect_error([&] { io::CsvTable::parse(missing, "f.csv", {"c"}); }, "f.csv:1:");
  std::istringstream ragged("a,b\n1,2\n3\n");
  expect_error([&] { io::CsvTable::parse(ragged, "f.csv", {"a"}); }, "f.csv:3:");
  std::istringstream nan("a\nabc\n");
  const auto t = io::CsvTable::parse(nan, "f.csv", {"a"});
  expect_error([&] { t.number(t.rows()[0], "a"); }, "f.csv:2:");
}

TEST(Csv, WriterQuotesAndRealsRoundTrip) {
  std::ostringstream out;
  io::CsvWriter w(out, {"k", "v"});
  w.row({"a,b", io::format_real(0.1)});
  w.row({"plain", io::format_real(1.0 / 3.0)});
  const auto s = out.str();
  EXPECT_EQ(s.back(), '\n');
  EXPECT_EQ(s.find('\r'), std::string::npos);
  std::istringstream in(s);
  const auto t = io::CsvTable::parse(in, "mem", {"k", "v"});
  EXPECT_EQ(t.field(t.rows()[0], "k"), "a,b");
  EXPECT_EQ(t.number(t.rows()[0], "v"), 0.1);
  EXPECT_EQ(t.number(t.rows()[1], "v"), 1.0 / 3.0);
  EXPECT_THROW(w.row({"only one"}), Error);
}

TEST(Manifest, ReadWriteAndResolve) {
  const auto dir = test::temp_dir("manifest");
  io::Manifest m;
  m.ladders.push_back(test::make_ladder("b", 2));
  m.ladders.push_back(test::make_ladder("a", 3));
  io::write_text_file(dir / "m.json", io::format_manifest(m));
  const auto back = io::read_manifest(dir / "m.json");
  ASSERT_EQ(back.ladders.size(), 2u);
  EXPECT_EQ(back.find("a").rungs.size(), 3u);
  EXPECT_EQ(back.resolve("x.png"), back.base_dir / "x.png");
  EXPECT_EQ(fs::weakly_canonical(back.base_dir), fs::weakly_canonical(dir));
  expect_error([&] { back.find("zzz"); }, "zzz");
  EXPECT_EQ(slurp(dir / "m.json").back(), '\n');
}

TEST(Manifest, RejectsBadInput) {
  const auto dir = test::temp_dir("manifest_bad");
  io::write_text_file(dir / "bad.json", "{\"ladders\": 3}\n");
  EXPECT_THROW(io::read_manifest(dir / "bad.json"), Error);
  io::write_text_file(dir / "notjson.json", "ladders:\n");
  expect_error([&] { io::read_manifest(dir / "notjson.json"); }, "invalid JSON");
  io::Manifest dup;
  dup.ladders = {test::make_ladder("a", 1), test::make_ladder("a", 1)};
  io::write_text_file(dir / "dup.json", io::format_manifest(dup));
  expect_error([&] { io::read_manifest(dir / "dup.json"); }, "duplicate ladder_id");
  io::Manifest gap;
  gap.ladders = {test::make_ladder("a", 3)};
  gap.ladders[0].rungs.erase(gap.ladders[0].rungs.begin());
  io::write_text_file(dir / "gap.json", io::format_manifest(gap));
  EXPECT_THROW(io::read_manifest(dir / "gap.json"), Error);
}

TEST(Records, RoundTripAndValidation) {
  const auto dir = test::temp_dir("records");
  std::vector<core::SatisfactionRecord> recs{{"a", 1, "s1", core::SubjectKind::human, true},
                                             {"a", 2, "s1", core::SubjectKind::machine, false}};
  io::write_text_file(dir / "r.csv", io::format_records(recs));
  const auto back = io::read_records(dir / "r.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].subject_kind, core::SubjectKind::machine);
  EXPECT_FALSE(back[1].satisfied);

  const std::string header = "ladder_id,rung_index,subject_id,subject_kind,satisfied\n";
  io::write_text_file(dir / "bad.csv", header + "a,1,s,human,1\na,1,s,human,yes\n");
  expect_error([&] { io::read_records(dir / "bad.csv"); }, ":3:");
  io::write_text_file(dir / "dup.csv", header + "a,1,s,human,1\na,1,s,human,0\n");
  expect_error([&] { io::read_records(dir / "dup.csv"); }, "duplicate record");
  io::write_text_file(dir / "kind.csv", header + "a,1,s,robot,1\n");
  expect_error([&] { io::read_records(dir / "kind.csv"); }, ":2:");
}

TEST(Labels, ColumnSelectionAndRange) {
  const auto dir = test::temp_dir("labels");
  io::write_text_file(dir / "l.csv", "ladder_id,rung_index,ratio,population_size\na,1,0.75,4\na,2,0.5,4\n");
  const auto m = io::read_labels(dir / "l.csv", {"sur", "ratio"});
  EXPECT_EQ(m.at({"a", 1}), 0.75);
  expect_error([&] { io::read_labels(dir / "l.csv", {"smr"}); }, "none of the label columns");
  io::write_text_file(dir / "o.csv", "ladder_id,rung_index,sur\na,1,1.5\n");
  expect_error([&] { io::read_labels(dir / "o.csv", {"sur"}); }, "outside [0, 1]");

  io::LabelMap lm{{{"a", 1}, 1.0 / 3.0}, {{"b", 2}, 0.0}};
  io::write_text_file(dir / "p.csv", io::format_proxy_labels(lm));
  EXPECT_EQ(io::read_labels(dir / "p.csv", {"sur_hat"}), lm);
}

TEST(SplitFile, Validation) {
  const auto dir = test::temp_dir("splitfile");
  io::write_text_file(dir / "s.csv", "ladder_id,split\na,train\nb,test\n");
  EXPECT_EQ(io::read_split_file(dir / "s.csv").at("b"), "test");
  io::write_text_file(dir / "bad.csv", "ladder_id,split\na,holdout\n");
  EXPECT_THROW(io::read_split_file(dir / "bad.csv"), Error);
}

TEST(Images, PngAndPnmRoundTrip) {
  const auto dir = test::temp_dir("images");
  std::mt19937_64 rng(1);
  for (std::size_t c : {1u, 3u}) {
    io::Image im(7, 5, c);
    for (auto& p : im.pixels) p = static_cast<std::uint8_t>(rng());
    for (const char* ext : {".png", c == 1 ? ".pgm" : ".ppm"}) {
      const auto path = dir / ("im" + std::to_string(c) + ext);
      io::write_image(path, im);
      EXPECT_EQ(io::read_image(path), im) << path;
    }
  }
  EXPECT_THROW(io::read_image(dir / "missing.png"), Error);
  EXPECT_THROW(io::write_image(dir / "x.bmp", io::Image(2, 2, 3)), Error);
  io::write_text_file(dir / "trunc.ppm", "P6\n4 4\n255\nabc");
  EXPECT_THROW(io::read_image(dir / "trunc.ppm"), Error);
}

TEST(Images, GrayReplicatedToRgbTensor) {
  io::Image g(2, 1, 1);
  g.pixels = {0, 255};
  const auto t = io::to_rgb_tensor(g);
  EXPECT_EQ(t.shape(), (nn::Shape{3, 1, 2}));
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_EQ(t.at(c, 0, 0), 0.0);
    EXPECT_EQ(t.at(c, 0, 1), 1.0);
  }
}

class CheckpointTest : public ::testing::Test {
 protected:
  static model::NetworkConfig micro(model::Variant v) {
    auto c = model::tiny_config(v);
    c.mixer.layers = 1;
    c.transformer_layers = 1;
    return c;
  }
};

TEST_F(CheckpointTest, RoundTripIsBitExact) {
  const auto dir = test::temp_dir("ckpt");
  model::Network net(micro(model::Variant::full), 17);
  io::CheckpointMeta meta{42, 9, "finetune", {{"note", "x"}}};
  io::save_checkpoint(dir / "a.ckpt", net, meta);
  const auto back = io::load_checkpoint(dir / "a.ckpt", model::Variant::full);
  EXPECT_EQ(back.meta.step, 42u);
  EXPECT_EQ(back.meta.seed, 9u);
  EXPECT_EQ(back.meta.phase, "finetune");
  EXPECT_EQ(back.meta.extra["note"], "x");
  ASSERT_EQ(back.network.parameters().size(), net.parameters().size());
  for (std::size_t i = 0; i < net.parameters().size(); ++i) {
    EXPECT_EQ(back.network.parameters()[i].name, net.parameters()[i].name);
    EXPECT_EQ(back.network.parameters()[i].var->value, net.parameters()[i].var->value);
  }
  EXPECT_EQ(nlohmann::json(back.network.config()), nlohmann::json(net.config()));
  // Serialization is a pure function of the contents.
  EXPECT_EQ(io::serialize_checkpoint(back.network, back.meta), slurp(dir / "a.ckpt"));
}

TEST_F(CheckpointTest, CorruptionIsDetected) {
  model::Network net(micro(model::Variant::no_dfrl), 3);
  const auto bytes = io::serialize_checkpoint(net, {});
  expect_error([&] { io::parse_checkpoint(bytes.substr(0, bytes.size() / 2), "t"); }, "corrupt checkpoint");
  expect_error([&] { io::parse_checkpoint(bytes.substr(0, 6), "t"); }, "corrupt checkpoint");
  auto flipped = bytes;
  flipped[flipped.size() - 100] ^= 0x01;
  expect_error([&] { io::parse_checkpoint(flipped, "t"); }, "corrupt checkpoint");
  auto magic = bytes;
  magic[0] = 'X';
  expect_error([&] { io::parse_checkpoint(magic, "t"); }, "corrupt checkpoint");
  expect_error([&] { io::parse_checkpoint(bytes + "x", "t"); }, "corrupt checkpoint");
}

TEST_F(CheckpointTest, VersionMismatchIsExplicit) {
  model::Network net(micro(model::Variant::full), 3);
  auto bytes = io::serialize_checkpoint(net, {});
  bytes[8] = 2;  // version field follows the 8-byte magic
  expect_error([&] { io::parse_checkpoint(bytes, "t"); }, "unsupported checkpoint version 2");
}

TEST_F(CheckpointTest, VariantMismatch) {
  model::Network net(micro(model::Variant::full), 3);
  const auto bytes = io::serialize_checkpoint(net, {});
  expect_error([&] { io::parse_checkpoint(bytes, "t", model::Variant::mlp_fusion); }, "config mismatch");
  EXPECT_NO_THROW(io::parse_checkpoint(bytes, "t", model::Variant::full));
}
