#include "ftrepair/case_studies.hpp"

#include <sstream>

namespace ftrepair {

namespace {

// Invariant of the load-shedding controller: the union of the six
// legitimate (sensor, switch) combinations.
bool grid_legitimate(long v1, long v2, long vg, bool w1, bool w2)
{
    if (v1 + v2 <= vg)
        return w1 && w2;
    if (v1 <= vg && v2 > vg)
        return w1 && !w2;
    if (v1 > vg && v2 <= vg)
        return !w1 && w2;
    if (v1 > vg && v2 > vg)
        return !w1 && !w2;
    // Both loads fit individually but not together: shed the smaller one.
    return v1 <= v2 ? (!w1 && w2) : (w1 && !w2);
}

std::string grid_invariant_text(const std::string& prime)
{
    const std::string v1 = "V1" + prime, v2 = "V2" + prime, vg = "VG" + prime;
    const std::string w1 = "w1" + prime, w2 = "w2" + prime;
    std::string out;
    out += "(" + v1 + " + " + v2 + " <= " + vg + " && " + w1 + " && " + w2 + ")";
    out += " || (" + v1 + " <= " + vg + " && " + v2 + " > " + vg + " && " + w1 + " && !" + w2 + ")";
    out += " || (" + v1 + " > " + vg + " && " + v2 + " <= " + vg + " && !" + w1 + " && " + w2 + ")";
    out += " || (" + v1 + " > " + vg + " && " + v2 + " > " + vg + " && !" + w1 + " && !" + w2 + ")";
    out += " || (" + v1 + " + " + v2 + " > " + vg + " && " + v1 + " <= " + vg + " && " + v2 + " <= " + vg +
           " && " + v1 + " <= " + v2 + " && !" + w1 + " && " + w2 + ")";
    out += " || (" + v1 + " + " + v2 + " > " + vg + " && " + v1 + " <= " + vg + " && " + v2 + " <= " + vg +
           " && " + v1 + " > " + v2 + " && " + w1 + " && !" + w2 + ")";
    return out;
}

}  // namespace

Model smart_grid_model(int max, GridVariant variant, int k)
{
    if (max < 1)
        throw UsageError("smart grid needs max >= 1");
    const std::size_t M = static_cast<std::size_t>(max) + 1;
    const std::size_t n = M * M * M * 4;
    Model m = Model::empty(n, k);
    m.name = variant == GridVariant::Db ? "smartgrid_db" : "smartgrid_db2";
    m.space.labels.reserve(n);

    // Bit 1 of the id is w1, bit 0 is w2; the four ids of one sensor
    // reading are consecutive.
    Bits by_switch[4] = {Bits(n), Bits(n), Bits(n), Bits(n)};
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t sw = s & 3;
        const std::size_t sensors = s >> 2;
        const long vg = static_cast<long>(sensors % M);
        const long v2 = static_cast<long>((sensors / M) % M);
        const long v1 = static_cast<long>(sensors / (M * M));
        const bool w1 = sw & 2;
        const bool w2 = sw & 1;
        by_switch[sw].set(s);
        if (grid_legitimate(v1, v2, vg, w1, w2))
            m.invariant.insert(static_cast<StateId>(s));
        m.space.labels.push_back("V1=" + std::to_string(v1) + ",V2=" + std::to_string(v2) +
                                 ",VG=" + std::to_string(vg) + ",w1=" + std::to_string(int(w1)) +
                                 ",w2=" + std::to_string(int(w2)));
    }

    for (StateId s = 0; s < n; ++s) {
        const std::size_t sw = s & 3;
        Bits same_sensors(n);
        for (std::size_t t = s & ~std::size_t{3}; t < (s | 3) + 1; ++t)
            same_sensors.set(t);
        m.delta_e.row(s) = by_switch[sw];
        if (m.invariant.contains(s))
            m.delta_e.row(s) &= m.invariant.bits();
        m.delta_r.row(s) = ~same_sensors;
        m.delta_b.row(s) = m.delta_r.row(s) - by_switch[sw];
        if (variant == GridVariant::Db2)
            m.delta_b.row(s) |= by_switch[sw ^ 3];
    }
    return m;
}

std::string smart_grid_source(int max, GridVariant variant, int k)
{
    if (max < 1)
        throw UsageError("smart grid needs max >= 1");
    std::ostringstream out;
    out << "// Load-shedding controller: generator G serving loads Z1 and Z2.\n"
        << "model " << (variant == GridVariant::Db ? "smartgrid_db" : "smartgrid_db2") << " {\n"
        << "  var V1: 0.." << max << ";\n"
        << "  var V2: 0.." << max << ";\n"
        << "  var VG: 0.." << max << ";\n"
        << "  var w1: bool;\n"
        << "  var w2: bool;\n\n"
        << "  invariant: " << grid_invariant_text("") << ";\n\n"
        << "  program {}\n\n"
        << "  // Sensors move, switches are left alone. Sensor changes that leave\n"
        << "  // the invariant are disturbances and only happen outside it.\n"
        << "  environment {\n"
        << "    w1' == w1 && w2' == w2 && ((" << grid_invariant_text("") << ") => (" << grid_invariant_text("'") << "));\n"
        << "  }\n\n"
        << "  // The controller cannot write sensors.\n"
        << "  restricted { V1' != V1 || V2' != V2 || VG' != VG; }\n\n"
        << "  bad {\n"
        << "    (V1' != V1 || V2' != V2 || VG' != VG) && (w1' != w1 || w2' != w2);\n";
    if (variant == GridVariant::Db2)
        out << "    w1' != w1 && w2' != w2;\n";
    out << "  }\n\n"
        << "  faults {}\n"
        << "  k: " << k << ";\n"
        << "}\n";
    return out.str();
}

namespace {

std::string cooker_source(bool with_valve)
{
    std::ostringstream out;
    out << "// Pressure cooker on a heat source that is always on.\n"
        << "model " << (with_valve ? "pressure_cooker" : "pressure_cooker_no_valve") << " {\n"
        << "  var p: 0..6;\n"
        << "  var failed: bool;\n\n"
        << "  invariant: p < 4;\n\n"
        << "  program {\n"
        << "    // vent\n"
        << "    !failed && (p == 4 || p == 5) && p' == p - 1 && failed' == failed;\n";
    if (with_valve)
        out << "    // overpressure valve\n"
            << "    p == 6 && p' < 4 && failed' == failed;\n";
    out << "  }\n\n"
        << "  // Heat. Regulation below 4 is abstracted into a steady state at 3.\n"
        << "  environment {\n"
        << "    p < 3 && p' == p + 1 && failed' == failed;\n"
        << "    p == 3 && p' == 3 && failed' == failed;\n"
        << "    p >= 4 && p < 6 && p' == p + 1 && failed' == failed;\n"
        << "    p == 6 && p' == 6 && failed' == failed;\n"
        << "  }\n\n"
        << "  bad {}\n"
        << "  restricted {}\n\n"
        << "  // The vent may get stuck.\n"
        << "  faults { !failed && failed' && p' == p; }\n\n"
        << "  k: 3;\n"
        << "}\n";
    return out.str();
}

}  // namespace

std::string pressure_cooker_source() { return cooker_source(true); }

std::string pressure_cooker_without_valve_source() { return cooker_source(false); }

}  // namespace ftrepair
