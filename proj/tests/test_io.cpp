#include <gtest/gtest.h>

#include <filesystem>
#include <limits>

#include "oracles.hpp"
#include "sslzsl/io.hpp"

using namespace sslzsl;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("sslzsl_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Csv, ParsesRows) {
  EXPECT_EQ(parse_matrix("1,2\n3,4", MatrixFormat::csv), (Matrix{{1, 2}, {3, 4}}));
  EXPECT_EQ(parse_matrix(" 1.5 , -2e3\r\n", MatrixFormat::csv), (Matrix{{1.5, -2000}}));
}

TEST(Csv, RaggedRowReportsLine) {
  try {
    parse_matrix("1,2\n3", MatrixFormat::csv);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("ragged row at line 2"), std::string::npos) << e.what();
  }
}

TEST(Csv, RejectsGarbageAndNonFinite) {
  EXPECT_THROW(parse_matrix("1,x\n", MatrixFormat::csv), ParseError);
  EXPECT_THROW(parse_matrix("1,,2\n", MatrixFormat::csv), ParseError);
  try {
    parse_matrix("1,2\n3,inf\n", MatrixFormat::csv);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("row 1, column 1"), std::string::npos) << e.what();
  }
}

TEST(Bin, HeaderLayout) {
  const std::string bytes = to_bin(Matrix{{1.0, 2.0}});
  ASSERT_EQ(bytes.size(), 22u + 16u);
  EXPECT_EQ(bytes.substr(0, 4), "ZSLM");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 2);
  EXPECT_EQ(bytes[6], 1);   // rows, little-endian
  EXPECT_EQ(bytes[14], 2);  // cols
}

TEST(Bin, F32IsWidened) {
  const std::string bytes = to_bin(Matrix{{0.1, 2.5}}, BinDtype::f32);
  EXPECT_EQ(bytes[5], 1);
  const Matrix m = parse_matrix(bytes, MatrixFormat::bin);
  EXPECT_EQ(m(0, 0), static_cast<double>(0.1f));
  EXPECT_EQ(m(0, 1), 2.5);
}

TEST(Bin, RejectsCorruptInput) {
  std::string bytes = to_bin(Matrix{{1.0}});
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(parse_matrix(bad_magic, MatrixFormat::bin), ParseError);
  EXPECT_THROW(parse_matrix(bytes.substr(0, bytes.size() - 1), MatrixFormat::bin), ParseError);
  auto nan_bytes = to_bin(Matrix{{std::numeric_limits<double>::quiet_NaN()}});
  EXPECT_THROW(parse_matrix(nan_bytes, MatrixFormat::bin), ParseError);
}

// Round trip through files for random shapes: BIN is bit-exact, CSV uses
// shortest round-trip text so it is exact too.
TEST(MatrixFiles, RoundTripProperty) {
  const auto dir = temp_dir("roundtrip");
  Rng rng(99);
  for (int t = 0; t < 20; ++t) {
    const std::size_t r = 1 + rng.below(6);
    const std::size_t c = 1 + rng.below(6);
    Matrix m = oracle::random_matrix(rng, r, c, std::pow(10.0, static_cast<double>(rng.below(9)) - 4.0));
    save_matrix(dir / "m.bin", m);
    save_matrix(dir / "m.csv", m);
    EXPECT_EQ(load_matrix(dir / "m.bin"), m);
    const Matrix back = load_matrix(dir / "m.csv");
    ASSERT_EQ(back.shape(), m.shape());
    EXPECT_LE(oracle::max_abs_diff(back, m), 1e-12);
  }
}

TEST(Labels, ParseAndErrors) {
  const auto dir = temp_dir("labels");
  save_labels(dir / "y.txt", {3, 0, 2});
  EXPECT_EQ(load_labels(dir / "y.txt"), (Labels{3, 0, 2}));
  detail::write_text(dir / "bad.txt", "1\n-2\n");
  EXPECT_THROW(load_labels(dir / "bad.txt"), ParseError);
}

TEST(KeyValue, ParseTrimsAndSkipsComments) {
  const auto kv = KeyValueFile::parse("# c\n a = 1 \n\nb=x=y\n");
  EXPECT_EQ(kv.require("a"), "1");
  EXPECT_EQ(kv.require("b"), "x=y");
  EXPECT_EQ(kv.get_uint("a", 0), 1u);
  EXPECT_THROW(KeyValueFile::parse("novalue\n"), ParseError);
  EXPECT_THROW(kv.require("missing"), DataError);
}
