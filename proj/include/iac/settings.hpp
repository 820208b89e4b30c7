/*
Copyright 2025 the iac authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

     https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include "iac/config.hpp"
#include "iac/supply_chain.hpp"
#include "iac/tracking.hpp"
#include "iac/trainer.hpp"

namespace iac {

supply::NetworkConfig network_from_config(const Config& c);
supply::ExogenousModel exogenous_from_config(const Config& c);
TrackingSpec tracking_from_config(const Config& c);
TrainConfig train_from_config(const Config& c);
SolveOptions solver_from_config(const Config& c, bool training);

/// Box for the packed supply-chain parameter (16 P entries then 4 q entries).
ParamSchedule supply_schedule_from_config(const Config& c);

}  // namespace iac
