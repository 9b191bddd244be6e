#pragma once

#include <ostream>
#include <span>
#include <string>

#include <json.hpp>

#include "skewsn/bifurcation.hpp"
#include "skewsn/graph_engine.hpp"

namespace skewsn::io {

/// 17 significant digits; round-trips every double.
std::string fmt(double v);

/// theta1[,theta2],value,escaped
void write_graph_csv(std::ostream& os, const GraphField& field);
/// theta1[,theta2],lo,hi,empty
void write_interval_csv(std::ostream& os, const IntervalField& field);
/// beta,min_gap,lambda_upper,lambda_lower,fraction_bounded (absent values left empty)
void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows);

nlohmann::json to_json(const BasePoint& p);
nlohmann::json to_json(const GraphField& field);
nlohmann::json to_json(const IntervalField& field);
nlohmann::json to_json(const PinchingReport& report);
nlohmann::json to_json(const BifurcationResult& result);
nlohmann::json to_json(std::span<const SweepRow> rows);

/// Dumps with doubles at 17 significant digits (nlohmann uses shortest round-trip already).
std::string dump(const nlohmann::json& j);

void write_file(const std::string& path, const std::string& content);

}  // namespace skewsn::io
