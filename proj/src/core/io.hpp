#pragma once

// File formats. Numbers in CSV use 17 significant digits so a reload
// reproduces every double exactly.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "analytic.hpp"
#include "ladder.hpp"
#include "scheme.hpp"
#include "verify.hpp"

namespace pqlab {

std::string format_double(double v);

/// `t,x,u`, one row per node per snapshot.
void write_snapshots_csv(const std::filesystem::path& path, const Trajectory& traj);
/// `t,mass,absorbed_singular,absorbed_source,boundary_outflux`, one row per snapshot.
void write_ledger_csv(const std::filesystem::path& path, const Trajectory& traj);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Parses a numeric CSV with a header line; throws Error(io) on malformed input.
CsvTable read_csv(const std::filesystem::path& path);

/// Trajectory geometry stored alongside the CSV files.
nlohmann::json trajectory_meta(const Trajectory& traj);

/// Rebuilds a trajectory from `snapshots.csv`, `ledger.csv` and its metadata.
Trajectory load_trajectory(const std::filesystem::path& snapshots, const std::filesystem::path& ledger,
                           const nlohmann::json& meta);

nlohmann::json to_json(const DerivedConstants& c);
nlohmann::json to_json(const BoundsReport& r);
nlohmann::json to_json(const PropertyResult& r);
nlohmann::json to_json(const VerificationReport& r);
nlohmann::json to_json(const MassLedger& l);

PropertyResult property_from_json(const nlohmann::json& j);

/// Writes `doc.dump(2)` plus a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace pqlab
