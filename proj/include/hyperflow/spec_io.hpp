#pragma once

// Hypergraph spec files: UTF-8 JSON of the form
//
//   {"n": 3,
//    "tensors": [{"order": 1,
//                 "entries": [{"head": 1, "tail": [2], "weight": 2.0}]}]}
//
// "tail" lists the primary tail node first, then the remaining tail nodes.
// Indices in the file are 1-based.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hyperflow/errors.hpp"
#include "hyperflow/hypergraph.hpp"

namespace hyperflow {

inline HyperTensorSet parse_spec(const nlohmann::json& doc) {
  using nlohmann::json;
  if (!doc.is_object()) throw ParseError("spec: top level must be an object");
  if (!doc.contains("n") || !doc["n"].is_number_integer())
    throw ParseError("spec: missing integer field \"n\"");
  const int n = doc["n"].get<int>();
  if (n < 1) throw ValidationError("spec: \"n\" must be positive");
  if (!doc.contains("tensors") || !doc["tensors"].is_array())
    throw ParseError("spec: missing array field \"tensors\"");

  std::vector<HyperEdge> entries;
  const auto& tensors = doc["tensors"];
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    const auto& layer = tensors[t];
    const std::string where = "tensors[" + std::to_string(t) + "]";
    if (!layer.is_object() || !layer.contains("order") || !layer["order"].is_number_integer())
      throw ParseError("spec: " + where + " needs an integer \"order\"");
    if (!layer.contains("entries") || !layer["entries"].is_array())
      throw ParseError("spec: " + where + " needs an array \"entries\"");
    const int order = layer["order"].get<int>();
    if (order < 1) throw ValidationError("spec: " + where + " has order < 1");
    const auto& list = layer["entries"];
    for (std::size_t j = 0; j < list.size(); ++j) {
      const auto& item = list[j];
      const std::string at = where + ".entries[" + std::to_string(j) + "]";
      if (!item.is_object() || !item.contains("head") || !item["head"].is_number_integer() ||
          !item.contains("tail") || !item["tail"].is_array() || !item.contains("weight") ||
          !item["weight"].is_number())
        throw ParseError("spec: " + at + " needs integer \"head\", array \"tail\", number \"weight\"");
      const auto& tail = item["tail"];
      if (static_cast<int>(tail.size()) != order)
        throw ValidationError("spec: " + at + " tail has " + std::to_string(tail.size()) +
                              " indices, order " + std::to_string(order) + " needs " +
                              std::to_string(order));
      HyperEdge e;
      e.order = order;
      e.head = item["head"].get<int>() - 1;
      for (std::size_t q = 0; q < tail.size(); ++q) {
        if (!tail[q].is_number_integer()) throw ParseError("spec: " + at + " tail index is not an integer");
        const int idx = tail[q].get<int>() - 1;
        if (q == 0)
          e.tail = idx;
        else
          e.rest.push_back(idx);
      }
      e.weight = item["weight"].get<double>();
      try {
        entries.push_back(e);
        // validate eagerly so the error names the file location
        (void)HyperTensorSet::create(n, {e});
      } catch (const ValidationError& err) {
        throw ValidationError("spec: " + at + ": " + err.what());
      }
    }
  }
  return HyperTensorSet::create(n, std::move(entries));
}

inline HyperTensorSet parse_spec_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("spec: malformed JSON: ") + e.what());
  }
  return parse_spec(doc);
}

inline HyperTensorSet load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("spec: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_spec_text(buf.str());
}

inline nlohmann::json to_json(const HyperTensorSet& tensors) {
  std::map<int, nlohmann::json> layers;
  for (const auto& e : tensors.entries()) {
    nlohmann::json tail = nlohmann::json::array();
    tail.push_back(e.tail + 1);
    for (int j : e.rest) tail.push_back(j + 1);
    auto& layer = layers[e.order];
    if (layer.is_null()) layer = {{"order", e.order}, {"entries", nlohmann::json::array()}};
    layer["entries"].push_back({{"head", e.head + 1}, {"tail", tail}, {"weight", e.weight}});
  }
  nlohmann::json doc = {{"n", tensors.size()}, {"tensors", nlohmann::json::array()}};
  for (auto& [r, layer] : layers) doc["tensors"].push_back(std::move(layer));
  return doc;
}

}  // namespace hyperflow
