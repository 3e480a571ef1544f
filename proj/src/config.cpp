// Copyright 2026 The ghztomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ghztomo/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ghztomo::config {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::string& section,
                         const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key))
      throw std::invalid_argument("config: unknown key '" + section + "." + key + "'");
}

const json& section(const json& root, const std::string& name) {
  if (!root.contains(name))
    throw std::invalid_argument("config: missing section '" + name + "'");
  const json& s = root.at(name);
  if (!s.is_object())
    throw std::invalid_argument("config: section '" + name + "' must be an object");
  return s;
}

template <typename T>
T fetch(const json& obj, const std::string& section_name, const std::string& key) {
  if (!obj.contains(key))
    throw std::invalid_argument("config: missing key '" + section_name + "." + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("config: bad value for '" + section_name + "." + key + "'");
  }
}

template <typename T>
T fetch_or(const json& obj, const std::string& section_name, const std::string& key,
           T fallback) {
  if (!obj.contains(key)) return fallback;
  return fetch<T>(obj, section_name, key);
}

}  // namespace

experiment::ExperimentConfig parse(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
  }
  if (!root.is_object()) throw std::invalid_argument("config: top level must be an object");
  reject_unknown_keys(root, "<top>", {"crystal", "homodyne", "run", "grid"});

  experiment::ExperimentConfig cfg;

  const json& crystal = section(root, "crystal");
  reject_unknown_keys(crystal, "crystal",
                      {"gamma", "phi1", "chi", "phi_a", "phi_b", "eta1", "eta2",
                       "herald_port"});
  cfg.crystal.gamma = fetch<double>(crystal, "crystal", "gamma");
  cfg.crystal.phi1 = fetch<double>(crystal, "crystal", "phi1");
  cfg.crystal.chi = fetch<double>(crystal, "crystal", "chi");
  cfg.crystal.phi_a = fetch<double>(crystal, "crystal", "phi_a");
  cfg.crystal.phi_b = fetch<double>(crystal, "crystal", "phi_b");
  cfg.crystal.eta1 = fetch<double>(crystal, "crystal", "eta1");
  cfg.crystal.eta2 = fetch<double>(crystal, "crystal", "eta2");
  const std::string port =
      fetch_or<std::string>(crystal, "crystal", "herald_port", "plus");
  if (port == "plus")
    cfg.crystal.port = source::HeraldPort::kPlus;
  else if (port == "minus")
    cfg.crystal.port = source::HeraldPort::kMinus;
  else
    throw std::invalid_argument("config: crystal.herald_port must be 'plus' or 'minus'");

  const json& homodyne = section(root, "homodyne");
  reject_unknown_keys(homodyne, "homodyne", {"eta"});
  cfg.homodyne_eta = fetch<double>(homodyne, "homodyne", "eta");

  const json& run = section(root, "run");
  reject_unknown_keys(run, "run", {"samples", "blocks", "seed", "output"});
  cfg.samples = fetch<long>(run, "run", "samples");
  cfg.blocks = fetch_or<int>(run, "run", "blocks", 20);
  cfg.seed = fetch<std::uint64_t>(run, "run", "seed");
  cfg.output = fetch_or<std::string>(run, "run", "output", "");

  const json& grid = section(root, "grid");
  reject_unknown_keys(grid, "grid", {"phi_start", "phi_stop", "points"});
  cfg.grid.start = fetch<double>(grid, "grid", "phi_start");
  cfg.grid.stop = fetch<double>(grid, "grid", "phi_stop");
  cfg.grid.points = fetch<int>(grid, "grid", "points");

  return cfg;
}

experiment::ExperimentConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

}  // namespace ghztomo::config
