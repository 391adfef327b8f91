#include "ctensor/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ctensor/errors.hpp"
#include "json.hpp"

namespace ct {

using Json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw SchemaError(path + ": " + what);
}

const Json& field(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path, "missing \"" + key + "\"");
  return *it;
}

double number(const Json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "inf" || s == "Inf" || s == "+inf") return INFINITY;
    if (s == "-inf" || s == "-Inf") return -INFINITY;
    if (s == "nan" || s == "NaN") return NAN;
  }
  fail(path, "expected a number");
}

std::int64_t integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) {
    if (j.is_number() && std::floor(j.get<double>()) == j.get<double>()) return j.get<std::int64_t>();
    fail(path, "expected an integer");
  }
  return j.get<std::int64_t>();
}

std::vector<double> numbers(const Json& obj, const std::string& key, const std::string& path) {
  const Json& a = field(obj, key, path);
  std::string p = path + "." + key;
  if (!a.is_array()) fail(p, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(number(a[i], p + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<Pos> positions(const Json& obj, const std::string& key, const std::string& path) {
  const Json& a = field(obj, key, path);
  std::string p = path + "." + key;
  if (!a.is_array()) fail(p, "expected an array");
  std::vector<Pos> out;
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(integer(a[i], p + "[" + std::to_string(i) + "]"));
  if (out.empty() || out[0] != 0) fail(p, "must start at 0");
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] < out[i - 1]) fail(p + "[" + std::to_string(i) + "]", "not monotone");
  }
  return out;
}

bool boolean(const Json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

Json num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

Level level_from_json(const Json& j, const std::string& path, Pos parents) {
  std::string kind = field(j, "kind", path).is_string() ? j["kind"].get<std::string>() : "";
  if (kind == "dense") {
    auto n = integer(field(j, "size", path), path + ".size");
    if (n < 0) fail(path + ".size", "negative size");
    return DenseLevel{n};
  }
  if (kind == "pinpoint") {
    PinpointLevel lv;
    lv.ptr = positions(j, "ptr", path);
    lv.crd = numbers(j, "crd", path);
    if (static_cast<Pos>(lv.ptr.size()) != parents + 1) fail(path + ".ptr", "length must be parent positions + 1");
    if (static_cast<Pos>(lv.crd.size()) != lv.ptr.back()) fail(path + ".crd", "length must equal ptr's last entry");
    return lv;
  }
  if (kind == "interval") {
    IntervalLevel lv;
    lv.ptr = positions(j, "ptr", path);
    lv.left = numbers(j, "left", path);
    lv.right = numbers(j, "right", path);
    if (static_cast<Pos>(lv.ptr.size()) != parents + 1) fail(path + ".ptr", "length must be parent positions + 1");
    if (lv.left.size() != lv.right.size()) fail(path + ".right", "length differs from left");
    if (static_cast<Pos>(lv.left.size()) != lv.ptr.back()) fail(path + ".left", "length must equal ptr's last entry");
    for (std::size_t i = 0; i < lv.left.size(); ++i) {
      if (lv.left[i] > lv.right[i]) fail(path + ".left[" + std::to_string(i) + "]", "left endpoint exceeds right");
    }
    const Json& lc = field(j, "lclose", path);
    const Json& rc = field(j, "rclose", path);
    if (lc.is_boolean() != rc.is_boolean()) fail(path, "lclose and rclose must both be flags or both arrays");
    if (lc.is_boolean()) {
      lv.lclose = lc.get<bool>();
      lv.rclose = rc.get<bool>();
    } else {
      lv.homogeneous = false;
      auto flags = [&](const Json& a, const std::string& key, std::vector<std::uint8_t>& out) {
        std::string p = path + "." + key;
        if (!a.is_array()) fail(p, "expected a boolean or an array of booleans");
        if (a.size() != lv.left.size()) fail(p, "length differs from left");
        for (std::size_t i = 0; i < a.size(); ++i) out.push_back(boolean(a[i], p + "[" + std::to_string(i) + "]"));
      };
      flags(lc, "lclose", lv.lclose_v);
      flags(rc, "rclose", lv.rclose_v);
    }
    return lv;
  }
  if (kind == "regular") {
    RegularLevel lv;
    lv.stride = number(field(j, "stride", path), path + ".stride");
    lv.len = number(field(j, "len", path), path + ".len");
    if (!(lv.stride > 0)) fail(path + ".stride", "must be positive");
    if (!(lv.len >= 0) || lv.len > lv.stride) fail(path + ".len", "must lie in [0, stride]");
    lv.rclose = j.contains("rclose") ? boolean(j["rclose"], path + ".rclose") : false;
    const Json& xs = field(j, "xs", path);
    if (!xs.is_array()) fail(path + ".xs", "expected an array");
    for (std::size_t i = 0; i < xs.size(); ++i) lv.xs.push_back(integer(xs[i], path + ".xs[" + std::to_string(i) + "]"));
    if (j.contains("ptr")) {
      lv.ptr = positions(j, "ptr", path);
    } else if (parents == 1) {
      lv.ptr = {0, static_cast<Pos>(lv.xs.size())};
    } else {
      fail(path, "missing \"ptr\" (required below the root)");
    }
    if (static_cast<Pos>(lv.ptr.size()) != parents + 1) fail(path + ".ptr", "length must be parent positions + 1");
    if (static_cast<Pos>(lv.xs.size()) != lv.ptr.back()) fail(path + ".xs", "length must equal ptr's last entry");
    return lv;
  }
  fail(path + ".kind", "unknown level kind \"" + kind + "\"");
}

}  // namespace

ContTensor tensor_from_json(const std::string& text, const std::string& fallback_name) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError(std::string("$: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("$", "expected an object");
  ContTensor t;
  t.name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : fallback_name;
  t.fill = j.contains("fill") ? number(j["fill"], "$.fill") : 0.0;
  const Json& levels = field(j, "levels", "$");
  if (!levels.is_array()) fail("$.levels", "expected an array");
  Pos parents = 1;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    std::string path = "$.levels[" + std::to_string(k) + "]";
    t.levels.push_back(level_from_json(levels[k], path, parents));
    parents = level_positions(t.levels.back(), parents);
  }
  t.values = numbers(j, "values", "$");
  if (static_cast<Pos>(t.values.size()) != parents) {
    fail("$.values", "has " + std::to_string(t.values.size()) + " entries, expected " + std::to_string(parents));
  }
  validate_tensor(t);
  return t;
}

std::string tensor_to_json(const ContTensor& t) {
  Json j;
  j["name"] = t.name;
  j["fill"] = num(t.fill);
  Json levels = Json::array();
  for (const auto& lv : t.levels) {
    Json l;
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, DenseLevel>) {
            l["kind"] = "dense";
            l["size"] = x.size;
          } else if constexpr (std::is_same_v<T, PinpointLevel>) {
            l["kind"] = "pinpoint";
            l["ptr"] = x.ptr;
            Json crd = Json::array();
            for (double v : x.crd) crd.push_back(num(v));
            l["crd"] = crd;
          } else if constexpr (std::is_same_v<T, IntervalLevel>) {
            l["kind"] = "interval";
            l["ptr"] = x.ptr;
            Json left = Json::array(), right = Json::array();
            for (double v : x.left) left.push_back(num(v));
            for (double v : x.right) right.push_back(num(v));
            l["left"] = left;
            l["right"] = right;
            if (x.homogeneous) {
              l["lclose"] = x.lclose;
              l["rclose"] = x.rclose;
            } else {
              Json lc = Json::array(), rc = Json::array();
              for (auto f : x.lclose_v) lc.push_back(f != 0);
              for (auto f : x.rclose_v) rc.push_back(f != 0);
              l["lclose"] = lc;
              l["rclose"] = rc;
            }
          } else {
            l["kind"] = "regular";
            l["stride"] = x.stride;
            l["len"] = x.len;
            l["rclose"] = x.rclose;
            l["ptr"] = x.ptr;
            l["xs"] = x.xs;
          }
        },
        lv);
    levels.push_back(l);
  }
  j["levels"] = levels;
  Json values = Json::array();
  for (double v : t.values) values.push_back(num(v));
  j["values"] = values;
  return j.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BindingError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ContTensor load_tensor(const std::string& path, const std::string& fallback_name) {
  try {
    return tensor_from_json(read_file(path), fallback_name);
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

void save_tensor(const ContTensor& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw BindingError("cannot write " + path);
  out << tensor_to_json(t);
}

}  // namespace ct
