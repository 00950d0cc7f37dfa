#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "relbench/common/error.hpp"
#include "relbench/common/hash.hpp"
#include "relbench/common/jsonl.hpp"
#include "relbench/common/text.hpp"

namespace fs = std::filesystem;
using namespace relbench;

TEST(Hash, KnownDigests) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Hash, FieldsAreSeparated) {
  EXPECT_NE(sha256_fields({"ab", "c"}), sha256_fields({"a", "bc"}));
  EXPECT_EQ(sha256_fields({"ab", "c"}), sha256_hex(std::string("ab\0c", 4)));
}

TEST(Text, SanitizeUtf8) {
  EXPECT_EQ(sanitize_utf8("plain"), "plain");
  EXPECT_EQ(sanitize_utf8("caf\xc3\xa9"), "caf\xc3\xa9");
  EXPECT_EQ(sanitize_utf8("a\xff" "b"), "a\xef\xbf\xbd" "b");
  EXPECT_EQ(sanitize_utf8("\xc3"), "\xef\xbf\xbd");
  // Overlong encoding of '/'.
  EXPECT_EQ(sanitize_utf8("\xc0\xaf"), "\xef\xbf\xbd\xef\xbf\xbd");
}

TEST(Text, CountLines) {
  EXPECT_EQ(count_lines(""), 0);
  EXPECT_EQ(count_lines("a"), 1);
  EXPECT_EQ(count_lines("a\n"), 1);
  EXPECT_EQ(count_lines("a\nb"), 2);
  EXPECT_EQ(count_lines("a\n\nb\n"), 3);
}

TEST(Text, SplitTrimJoin) {
  EXPECT_EQ(split("a,b,,c", ','), (std::vector<std::string>{"a", "b", "", "c"}));
  EXPECT_EQ(trim("  x y \t\n"), "x y");
  EXPECT_EQ(join({"a", "b"}, "::"), "a::b");
}

TEST(Text, FormatFixedRoundsHalfAwayFromZero) {
  EXPECT_EQ(format_fixed(0.125, 2), "0.13");
  EXPECT_EQ(format_fixed(2.5, 0), "3");
  EXPECT_EQ(format_fixed(-2.5, 0), "-3");
  EXPECT_EQ(format_fixed(1.0 / 3.0, 5), "0.33333");
  EXPECT_DOUBLE_EQ(round_to(0.123456, 5), 0.12346);
}

TEST(Text, AtomicWriteAndRead) {
  fs::path dir = fs::temp_directory_path() / "relbench_common_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::string path = (dir / "out.txt").string();
  write_file_atomic(path, "hello\n");
  EXPECT_EQ(read_file(path), "hello\n");
  write_file_atomic(path, "again");
  EXPECT_EQ(read_file(path), "again");
  EXPECT_FALSE(fs::exists(path + ".tmp"));
  write_file_atomic((dir / "nested" / "deeper" / "x").string(), "x");
  EXPECT_EQ(read_file((dir / "nested" / "deeper" / "x").string()), "x");
  // A regular file where a directory is needed.
  EXPECT_THROW(write_file_atomic((dir / "out.txt" / "x").string(), "x"), Error);
  fs::remove_all(dir);
}

TEST(Text, ReadMissingFileIsIoError) {
  try {
    read_file("/nonexistent/relbench/file");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(Jsonl, ParsesAndReportsLine) {
  auto rows = parse_jsonl("{\"a\":1}\n\n{\"a\":2}\n", "mem");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1]["a"], 2);
  try {
    parse_jsonl("{\"a\":1}\n{oops\n", "mem");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(e.what()).find("mem:2"), std::string::npos);
  }
}

TEST(Jsonl, RoundTripKeepsKeyOrder) {
  std::vector<Json> rows{Json{{"z", 1}, {"a", "x"}}};
  std::string text = to_jsonl(rows);
  EXPECT_EQ(text, "{\"z\":1,\"a\":\"x\"}\n");
  EXPECT_EQ(parse_jsonl(text, "mem")[0], rows[0]);
}

TEST(ErrorCodes, Names) {
  EXPECT_STREQ(to_string(ErrorCode::kCollision), "annotator_collision");
  EXPECT_STREQ(to_string(ErrorCode::kMissingIndex), "missing_index");
}
