#include <doctest.h>

#include <sstream>

#include "prisample/csv.hpp"
#include "prisample/error.hpp"
#include "support.hpp"

using namespace prisample;

namespace {

std::vector<Record> parse(const std::string& text) {
  std::istringstream in(text);
  return read_records(in, "t.csv");
}

std::string error_text(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return std::string(e.code_name()) + " " + e.what();
  }
  return "no error";
}

}  // namespace

TEST_SUITE("csv") {
  TEST_CASE("node csv") {
    const auto rs = parse("id,fo,fr,ac\nu1,300,20,5\nu2,0,1,2.5\n");
    REQUIRE(rs.size() == 2);
    CHECK(rs[0].id == "u1");
    CHECK(rs[0].kind == RecordKind::node);
    CHECK(rs[0].features.at("fo") == 300.0);
    CHECK(rs[1].features.at("ac") == 2.5);
  }

  TEST_CASE("extra node columns become features; CRLF and blank lines tolerated") {
    const auto rs = parse("id,fo,fr,ac,score\r\na,1,2,3,9\r\n\r\nb,4,5,6,0\r\n");
    REQUIRE(rs.size() == 2);
    CHECK(rs[1].features.at("score") == 0.0);
  }

  TEST_CASE("link csv derives ffan and numbers repeated pairs") {
    const auto rs = parse("u1,u2,fo1,fo2\na,b,10,50\nb,a,50,10\na,b,10,50\n");
    REQUIRE(rs.size() == 3);
    CHECK(rs[0].id == "a->b");
    CHECK(rs[0].kind == RecordKind::link);
    CHECK(rs[0].features.at("ffan") == 5.0);
    CHECK(rs[1].features.at("ffan") == 0.2);
    CHECK(rs[2].id == "a->b#2");
    REQUIRE(rs[0].ends.has_value());
    CHECK(rs[0].ends->from == "a");
  }

  TEST_CASE("errors carry source and line") {
    CHECK(error_text("id,fo,fr,ac\na,1,2,3\na,4,5,6\n") ==
          "DuplicateId t.csv:3: duplicate id 'a' (first seen on line 2)");
    CHECK(error_text("id,fo,fr,ac\na,1,2\n").starts_with("Parse t.csv:2:"));
    CHECK(error_text("id,fo,fr,ac\na,1,x,3\n").starts_with("Parse t.csv:2:"));
    CHECK(error_text("id,fo,fr,ac\na,1,-2,3\n").starts_with("InvalidFeature t.csv:2:"));
    CHECK(error_text("id,fo,fr,ac\na,1,inf,3\n").starts_with("InvalidFeature t.csv:2:"));
    CHECK(error_text("u1,u2,fo1,fo2\na,b,0,3\n").starts_with("ZeroDenominator t.csv:2:"));
    CHECK(error_text("name,fo\n").starts_with("Parse t.csv:1:"));
    CHECK(error_text("").starts_with("Parse t.csv:"));
  }

  TEST_CASE("write then read reproduces records") {
    testing::Gen g(3);
    const auto nodes = testing::pareto_nodes(g, 50);
    std::ostringstream out;
    write_nodes(out, nodes);
    std::istringstream in(out.str());
    CHECK(read_records(in) == nodes);

    const std::vector<Record> links{Record::link("a", "b", 3, 7), Record::link("a", "b", 3, 7, 2),
                                    Record::link("b", "c", 7, 1)};
    std::ostringstream lout;
    write_links(lout, links);
    std::istringstream lin(lout.str());
    CHECK(read_records(lin) == links);
  }
}
