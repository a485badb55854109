#pragma once

#include "ftrepair/model.hpp"

#include <string>

namespace ftrepair {

enum class GridVariant { Db, Db2 };

// Load-shedding controller with sensors V1, V2, VG in 0..max and switches
// w1, w2. States are numbered row-major over (V1, V2, VG, w1, w2).
// The program may never write a sensor (delta_r). The environment may change
// sensors but never switches, and from inside S it only moves within S.
// delta_b holds the variant's bad transitions that the environment cannot
// take: sensor and switch changing together, and for Db2 also flipping both
// switches at once.
Model smart_grid_model(int max, GridVariant variant, int k = 2);

// The same model as model-file source text.
std::string smart_grid_source(int max, GridVariant variant, int k = 2);

// Pressure cooker: pressure 0..6, vent working or failed. Heat raises the
// pressure, the vent lowers 4 and 5 by one while it works, the valve drops
// 6 below 4. Vent failures are faults.
std::string pressure_cooker_source();

// The pressure cooker with its program restricted to vent moves only.
std::string pressure_cooker_without_valve_source();

}  // namespace ftrepair
