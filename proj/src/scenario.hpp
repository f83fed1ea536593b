// lischan: channel estimation toolkit for LIS-assisted mm-Wave massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include <json.hpp>

namespace lischan {

// All system dimensions, path counts and noise knobs for one experiment.
// Loadable from JSON with field names matching the members verbatim.
struct ScenarioConfig {
  int M = 16;     // BS antennas
  int L = 8;      // LIS elements
  int K = 2;      // users
  int P = 16;     // pilot count, phase I (P >= M)
  int N_D = 3;    // direct-channel paths
  int N_A = 3;    // LIS-user paths
  int N_H = 3;    // BS-LIS paths
  double angle_range[2] = {-M_PI, M_PI};  // user-path AOA draw interval, rad
  double noise_power = 0.0;               // sigma_n^2, linear
  std::uint64_t seed = 1;

  void validate() const;  // throws config_error
  nlohmann::json to_json() const;
  static ScenarioConfig from_json(const nlohmann::json& j);
  static ScenarioConfig load(const std::string& path);
};

}  // namespace lischan
