// lischan: channel estimation toolkit for LIS-assisted mm-Wave massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0

#include "scenario.hpp"

#include <fstream>

#include "errors.hpp"

namespace lischan {

void ScenarioConfig::validate() const {
  if (M < 1 || L < 1 || K < 1 || P < 1 || N_D < 1 || N_A < 1 || N_H < 1)
    throw config_error("scenario: all dimensions and path counts must be >= 1");
  if (P < M)
    throw config_error("scenario: P >= M required (orthogonal phase-I pilots)");
  if (noise_power < 0.0)
    throw config_error("scenario: noise_power must be >= 0");
  if (!(angle_range[0] <= angle_range[1]))
    throw config_error("scenario: angle_range must be an ordered pair");
}

nlohmann::json ScenarioConfig::to_json() const {
  return nlohmann::json{
      {"M", M},         {"L", L},
      {"K", K},         {"P", P},
      {"N_D", N_D},     {"N_A", N_A},
      {"N_H", N_H},     {"angle_range", {angle_range[0], angle_range[1]}},
      {"noise_power", noise_power},
      {"seed", seed}};
}

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
  ScenarioConfig c;
  try {
    c.M = j.at("M").get<int>();
    c.L = j.at("L").get<int>();
    c.K = j.at("K").get<int>();
    c.P = j.value("P", c.M);
    c.N_D = j.at("N_D").get<int>();
    c.N_A = j.at("N_A").get<int>();
    c.N_H = j.at("N_H").get<int>();
    if (j.contains("angle_range")) {
      c.angle_range[0] = j["angle_range"].at(0).get<double>();
      c.angle_range[1] = j["angle_range"].at(1).get<double>();
    }
    c.noise_power = j.value("noise_power", 0.0);
    c.seed = j.value("seed", std::uint64_t{1});
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("scenario: malformed JSON: ") + e.what());
  }
  c.validate();
  return c;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("scenario: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error("scenario: parse error in " + path + ": " + e.what());
  }
  return from_json(j.contains("scenario") ? j["scenario"] : j);
}

}  // namespace lischan
