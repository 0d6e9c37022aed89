#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qm/belief.hpp"
#include "qm/domains.hpp"
#include "qm/model.hpp"
#include "qm/policy.hpp"
#include "qm/quasimetric.hpp"
#include "qm/risk.hpp"
#include "qm/sim.hpp"
#include "qm/value_iteration.hpp"

namespace qm {

/// Malformed input text (bad JSON, wrong field types).
class ParseError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A model that parsed but failed validation.
class InvalidModelError : public ValidationError {
public:
    InvalidModelError(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// Shortest text that reads back to the same double; "inf" for +inf.
std::string format_number(double v);

// Model interchange (JSON).
void write_model(const MdpModel& model, std::ostream& os);
MdpModel read_model(std::istream& is, bool validate = true);
void save_model(const MdpModel& model, const std::string& path);
/// Throws IoError when the file is missing, ParseError or InvalidModelError otherwise.
MdpModel load_model(const std::string& path, bool validate = true);

// CSV exports.
void write_distance_csv(const MdpModel& model, const QuasiDistanceField& d, std::ostream& os);
void write_value_csv(const MdpModel& model, const ValueField& v, std::ostream& os);
void write_policy_csv(const MdpModel& model, const PolicyTable& p, std::ostream& os);
void write_trajectory_csv(const TrajectoryRecord& tr, std::ostream& os);
void write_bench_csv(const BenchResult& b, std::ostream& os);
void write_mean_trajectory_csv(const MonteCarloSummary& s, std::ostream& os);
void write_volume_csv(const std::vector<std::pair<double, std::size_t>>& volume, std::ostream& os);

/// Parses the distance CSV back into values (used by tests and tooling).
std::vector<double> read_distance_csv(std::istream& is);

// JSON side files.
void write_risk_json(const MdpModel& model, const RiskReport& r, std::ostream& os);
ObservationModel read_observation_model(std::istream& is);
void write_observation_model(const ObservationModel& obs, std::ostream& os);
MazeSpec read_maze_spec(std::istream& is);
void write_maze_spec(const MazeSpec& spec, std::ostream& os);

/// Opens a file for reading, throwing IoError("... not found") when absent.
std::ifstream open_input(const std::string& path);

}  // namespace qm
