#pragma once

#include "ricci/classify.hpp"
#include "ricci/dynamics.hpp"
#include "ricci/invariants.hpp"
#include "ricci/mountainpass.hpp"

#include <nlohmann/json.hpp>

#include <ostream>
#include <string>

namespace ricci {

/// Shortest round-trippable decimal form; identical across runs.
std::string format_double(double v);

nlohmann::json to_json(const Spectrum& sp);
nlohmann::json to_json(const LevelValue& lv);
nlohmann::json to_json(const LevelReport& rep);
nlohmann::json to_json(const FlowResult& fr);
nlohmann::json to_json(const CriticalMetric& cm);
nlohmann::json to_json(const RegionLabel& lab);
nlohmann::json to_json(const SaddleResult& sr);

/// CSV emitters; column schemas documented in the README.
void write_sweep_csv(std::ostream& os, const SpaceSpec& space,
                     const std::vector<SweepRecord>& records);
void write_image_csv(std::ostream& os, const SpaceSpec& space,
                     const std::vector<ImagePoint>& points);
void write_locus_csv(std::ostream& os, const SpaceSpec& space,
                     const std::vector<LocusPoint>& points);

/// Flat scatter of the projected image points (first two coordinates),
/// definite points dark, indefinite light; fixed square viewport.
void write_image_svg(std::ostream& os, const std::vector<ImagePoint>& points);

}  // namespace ricci
