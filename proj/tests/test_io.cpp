#include "ctensor/io.hpp"
#include "doctest.h"

using namespace ct;

namespace {

const char* kFx = R"({
  "name": "x",
  "fill": 0,
  "levels": [{"kind": "interval", "ptr": [0, 2], "left": [1, 4.1], "right": [3, 5.1],
              "lclose": true, "rclose": true}],
  "values": [1, 2]
})";

}  // namespace

TEST_CASE("f_x round-trips byte-stably") {
  auto t = tensor_from_json(kFx);
  CHECK(tensor_eval(t, {2.0}) == 1);
  CHECK(tensor_eval(t, {4.5}) == 2);
  std::string once = tensor_to_json(t);
  std::string twice = tensor_to_json(tensor_from_json(once));
  CHECK(once == twice);
  CHECK(once.find("4.1") != std::string::npos);
}

TEST_CASE("heterogeneous flags and infinite endpoints") {
  auto t = tensor_from_json(R"({"name": "h", "levels": [{"kind": "interval", "ptr": [0, 2],
      "left": ["-inf", 2], "right": [1, 3], "lclose": [false, true], "rclose": [false, true]}],
      "values": [5, 6]})");
  CHECK(tensor_eval(t, {-1e300}) == 5);
  CHECK(tensor_eval(t, {1.0}) == 0);
  CHECK(tensor_eval(t, {2.0}) == 6);
  auto back = tensor_from_json(tensor_to_json(t));
  CHECK(tensor_to_json(back) == tensor_to_json(t));
}

TEST_CASE("schema errors name the JSON path") {
  auto msg = [](const char* text) -> std::string {
    try {
      tensor_from_json(text);
    } catch (const SchemaError& e) {
      return e.what();
    }
    return "";
  };
  CHECK(msg(R"({"levels": [{"kind": "interval", "ptr": [0, 1], "left": [3], "right": [2],
      "lclose": true, "rclose": true}], "values": [1]})")
            .find("$.levels[0].left[0]") != std::string::npos);
  CHECK(msg(R"({"levels": [{"kind": "interval", "ptr": [0, 2], "left": [1, 3], "right": [2, 4],
      "lclose": [true], "rclose": [true, true]}], "values": [1, 1]})")
            .find("$.levels[0].lclose") != std::string::npos);
  CHECK(msg(R"({"levels": [{"kind": "blob"}], "values": []})").find("$.levels[0].kind") != std::string::npos);
  CHECK(msg(R"({"levels": [], "values": [1, 2]})").find("$.values") != std::string::npos);
  CHECK(msg("{nope").find("$") != std::string::npos);
}

TEST_CASE("storage invariants are enforced on load") {
  CHECK_THROWS_AS(tensor_from_json(R"({"levels": [{"kind": "interval", "ptr": [0, 2], "left": [1, 2],
      "right": [3, 4], "lclose": true, "rclose": true}], "values": [1, 1]})"),
                  OverlapError);
  CHECK_THROWS_AS(tensor_from_json(R"({"levels": [{"kind": "pinpoint", "ptr": [0, 2], "crd": [5, 1]}],
      "values": [1, 1]})"),
                  UnsortedError);
}

TEST_CASE("mixed dense, regular and rank-0") {
  auto t = tensor_from_json(R"({"name": "g", "levels": [{"kind": "dense", "size": 2},
      {"kind": "regular", "stride": 1, "len": 1, "ptr": [0, 1, 3], "xs": [0, 0, 1]}],
      "values": [1, 2, 3]})");
  CHECK(tensor_eval(t, {0, 0.5}) == 1);
  CHECK(tensor_eval(t, {1, 1.5}) == 3);
  CHECK(tensor_eval(t, {1, 2.0}) == 0);
  CHECK(tensor_from_json(tensor_to_json(t)).values == t.values);
  auto s = tensor_from_json(R"({"name": "s", "levels": [], "values": [4]})");
  CHECK(s.values.at(0) == 4);
}
