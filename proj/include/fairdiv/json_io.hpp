#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "fairdiv/errors.hpp"
#include "fairdiv/instance.hpp"

namespace fairdiv {

using nlohmann::json;

namespace io_detail {

inline Rational parse_rational_at(const json& node, const std::string& path) {
  if (!node.is_string())
    throw ParseError(path, "expected a rational encoded as a \"p/q\" string");
  auto r = try_parse_rational(node.get<std::string>());
  if (!r) throw ParseError(path, "not a valid rational: " + node.get<std::string>());
  return *r;
}

inline int parse_int_at(const json& node, const std::string& path) {
  if (!node.is_number_integer())
    throw ParseError(path, "expected an integer");
  return node.get<int>();
}

inline const json& member(const json& node, const std::string& key, const std::string& path) {
  if (!node.is_object()) throw ParseError(path, "expected an object");
  auto it = node.find(key);
  if (it == node.end()) throw ParseError(path + "." + key, "missing");
  return *it;
}

inline std::vector<Rational> parse_rational_array(const json& node, const std::string& path) {
  if (!node.is_array()) throw ParseError(path, "expected an array");
  std::vector<Rational> out;
  for (std::size_t i = 0; i < node.size(); ++i)
    out.push_back(parse_rational_at(node[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline ValuationSpec parse_valuation(const json& node, const std::string& path) {
  const std::string kind = [&] {
    const json& k = member(node, "kind", path);
    if (!k.is_string()) throw ParseError(path + ".kind", "expected a string");
    return k.get<std::string>();
  }();
  if (kind == "additive") {
    AdditiveValuation v;
    v.weights = parse_rational_array(member(node, "weights", path), path + ".weights");
    return v;
  }
  if (kind == "truncated_additive") {
    TruncatedAdditiveValuation v;
    v.weights = parse_rational_array(member(node, "weights", path), path + ".weights");
    v.cap = parse_rational_at(member(node, "cap", path), path + ".cap");
    return v;
  }
  if (kind == "coverage") {
    CoverageValuation v;
    v.element_weights = parse_rational_array(member(node, "weights", path), path + ".weights");
    const json& sets = member(node, "sets", path);
    if (!sets.is_array()) throw ParseError(path + ".sets", "expected an array");
    for (std::size_t g = 0; g < sets.size(); ++g) {
      const std::string p = path + ".sets[" + std::to_string(g) + "]";
      if (!sets[g].is_array()) throw ParseError(p, "expected an array");
      std::vector<int> cover;
      for (std::size_t e = 0; e < sets[g].size(); ++e)
        cover.push_back(parse_int_at(sets[g][e], p + "[" + std::to_string(e) + "]"));
      v.covers.push_back(std::move(cover));
    }
    return v;
  }
  if (kind == "splc") {
    SplcValuation v;
    v.types = parse_int_at(member(node, "types", path), path + ".types");
    const json& copies = member(node, "copies", path);
    if (!copies.is_array()) throw ParseError(path + ".copies", "expected an array");
    for (std::size_t j = 0; j < copies.size(); ++j)
      v.copies.push_back(parse_int_at(copies[j], path + ".copies[" + std::to_string(j) + "]"));
    const json& values = member(node, "values", path);
    if (!values.is_array()) throw ParseError(path + ".values", "expected an array");
    for (std::size_t j = 0; j < values.size(); ++j)
      v.values.push_back(
          parse_rational_array(values[j], path + ".values[" + std::to_string(j) + "]"));
    return v;
  }
  throw ParseError(path + ".kind", "unknown valuation kind: " + kind);
}

}  // namespace io_detail

inline Instance parse_instance_json(const json& doc) {
  using namespace io_detail;
  Instance inst;
  const int n = parse_int_at(member(doc, "agents", "$"), "$.agents");
  inst.entitlements = parse_rational_array(member(doc, "entitlements", "$"), "$.entitlements");
  const json& vals = member(doc, "valuations", "$");
  if (!vals.is_array()) throw ParseError("$.valuations", "expected an array");
  for (std::size_t i = 0; i < vals.size(); ++i)
    inst.valuations.push_back(
        parse_valuation(vals[i], "$.valuations[" + std::to_string(i) + "]"));
  if (n != inst.agent_count())
    throw ParseError("$.agents", "agent count does not match the valuations array");
  try {
    inst.check_valid();
  } catch (const ValidationError& e) {
    throw ParseError("$", e.what());
  }
  return inst;
}

inline Instance parse_instance(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ParseError("$", "not valid JSON");
  return parse_instance_json(doc);
}

inline json write_instance_json(const Instance& inst) {
  json doc;
  doc["agents"] = inst.agent_count();
  json ents = json::array();
  for (const auto& b : inst.entitlements) ents.push_back(to_string(b));
  doc["entitlements"] = std::move(ents);
  json vals = json::array();
  for (const auto& spec : inst.valuations) {
    json v;
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, AdditiveValuation>) {
            v["kind"] = "additive";
            json w = json::array();
            for (const auto& x : s.weights) w.push_back(to_string(x));
            v["weights"] = std::move(w);
          } else if constexpr (std::is_same_v<T, TruncatedAdditiveValuation>) {
            v["kind"] = "truncated_additive";
            json w = json::array();
            for (const auto& x : s.weights) w.push_back(to_string(x));
            v["weights"] = std::move(w);
            v["cap"] = to_string(s.cap);
          } else if constexpr (std::is_same_v<T, CoverageValuation>) {
            v["kind"] = "coverage";
            v["sets"] = s.covers;
            json w = json::array();
            for (const auto& x : s.element_weights) w.push_back(to_string(x));
            v["weights"] = std::move(w);
          } else {
            v["kind"] = "splc";
            v["types"] = s.types;
            v["copies"] = s.copies;
            json rows = json::array();
            for (const auto& row : s.values) {
              json r = json::array();
              for (const auto& x : row) r.push_back(to_string(x));
              rows.push_back(std::move(r));
            }
            v["values"] = std::move(rows);
          }
        },
        spec);
    vals.push_back(std::move(v));
  }
  doc["valuations"] = std::move(vals);
  return doc;
}

inline std::string write_instance(const Instance& inst) {
  return write_instance_json(inst).dump(2) + "\n";
}

inline Allocation parse_allocation_json(const json& doc) {
  using namespace io_detail;
  Allocation alloc;
  const json& bundles = member(doc, "bundles", "$");
  if (!bundles.is_array()) throw ParseError("$.bundles", "expected an array");
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    const std::string p = "$.bundles[" + std::to_string(i) + "]";
    if (!bundles[i].is_array()) throw ParseError(p, "expected an array");
    std::vector<int> b;
    for (std::size_t j = 0; j < bundles[i].size(); ++j)
      b.push_back(parse_int_at(bundles[i][j], p + "[" + std::to_string(j) + "]"));
    alloc.bundles.push_back(std::move(b));
  }
  return alloc;
}

inline Allocation parse_allocation(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ParseError("$", "not valid JSON");
  return parse_allocation_json(doc);
}

inline json write_allocation_json(const Allocation& alloc) {
  json doc;
  doc["bundles"] = alloc.bundles;
  return doc;
}

inline std::string write_allocation(const Allocation& alloc) {
  return write_allocation_json(alloc).dump(2) + "\n";
}

}  // namespace fairdiv
