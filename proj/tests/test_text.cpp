#include "catch_amalgamated.hpp"

#include <cmath>
#include <sstream>

#include "fet/io.hpp"
#include "fet/text.hpp"

using namespace fet;

TEST_CASE("word tokens keep inner apostrophes and hyphens", "[text]") {
  CHECK(text::word_tokens("Rock-and-roll, O'Neil's  TOUR!") ==
        std::vector<std::string>{"rock-and-roll", "o'neil's", "tour"});
  CHECK(text::split_whitespace("  a  b\tc ") == std::vector<std::string>{"a", "b", "c"});
  CHECK(text::trim("\t x y \n") == "x y");
}

TEST_CASE("token sequence search is case-insensitive and contiguous", "[text]") {
  const std::vector<std::string> hay = {"the", "Leonardo", "da", "Vinci", "museum"};
  const std::vector<std::string> hit = {"leonardo", "DA", "vinci"};
  const std::vector<std::string> gap = {"leonardo", "vinci"};
  const std::vector<std::string> empty;
  CHECK(text::contains_token_sequence(hay, hit));
  CHECK_FALSE(text::contains_token_sequence(hay, gap));
  CHECK_FALSE(text::contains_token_sequence(hay, empty));
}

TEST_CASE("background idf", "[text]") {
  const std::vector<std::string> docs = {"a b", "a c", "d"};
  const auto bg = text::BackgroundTable::from_documents(docs);
  CHECK(bg.documents() == 3);
  CHECK(bg.document_frequency("a") == 2);
  CHECK(bg.document_frequency("a b") == 1);
  CHECK(bg.idf("a") == Catch::Approx(std::log(4.0 / 3.0) + 1.0));
  CHECK(bg.idf("zzz") == Catch::Approx(std::log(4.0) + 1.0));

  std::ostringstream out;
  bg.write(out);
  std::istringstream in(out.str());
  const auto back = text::BackgroundTable::parse(in);
  CHECK(back.documents() == 3);
  CHECK(back.document_frequency("a b") == 1);
}

TEST_CASE("rank terms orders by tf-idf then position", "[text]") {
  const auto bg = text::BackgroundTable::from_documents(std::vector<std::string>{"apple pie", "apple"});
  const std::vector<std::vector<std::string>> docs = {text::word_tokens("the apple and the pear")};
  const auto ranked = text::rank_terms(docs, bg);
  REQUIRE(ranked.size() == 2);
  CHECK(ranked[0].term == "pear");
  CHECK(ranked[1].term == "apple");

  const auto excluded = text::rank_terms(docs, bg, {"pear"});
  REQUIRE(excluded.size() == 1);
  CHECK(excluded[0].term == "apple");
}

TEST_CASE("sha256 of known strings", "[io]") {
  CHECK(io::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("jsonl reader skips blank lines and reports line numbers", "[io]") {
  std::istringstream in("{\"a\":1}\n\n{\"a\":2}\n");
  std::vector<std::size_t> lines;
  io::read_jsonl(in, [&](const io::Json& j, std::size_t line) {
    lines.push_back(line);
    CHECK(j.contains("a"));
  });
  CHECK(lines == std::vector<std::size_t>{1, 3});
}
