#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pcreg/design.hpp"
#include "pcreg/metrics.hpp"
#include "pcreg/signal.hpp"
#include "pcreg/solver.hpp"
#include "pcreg/tuning.hpp"

namespace pcreg {

enum class CpLayout { OneCP, NineEqual, NineUnequal };

std::string layout_name(CpLayout layout);

// Boundary/level presets; boundaries scale proportionally when p != 1000.
PiecewiseSignal expand_layout(CpLayout layout, double gamma, int p);

struct Scenario {
    DesignFamily family = DesignFamily::Identity;
    int n = 1000;
    int p = 1000;
    int h = 10;                      // Band / GaussianBandCov bandwidth
    CpLayout layout = CpLayout::OneCP;
    double gamma = 1.0;
    double sigma = 1.0;
    int replications = 100;
    uint64_t seed = 1;
    bool row_scaled = false;
    bool per_rep_lambda_max = false; // default: grid shared from replication 0
    SolverConfig solver;
    TuningPlan tuning;
};

// Every preset named by family and layout, full-scale dimensions.
std::vector<std::string> preset_names();
std::optional<Scenario> preset_scenario(const std::string& name);

struct ReplicationRecord {
    int rep_index = 0;
    EvalResult fl;     // raw change points of the fit
    EvalResult flmf;   // after the mean filter
    EvalResult flmtf;  // after mean and time filters
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double tau = 0.0;
    bool no_signal = false;
    int bandwidth = 0;
    int gap = 0;
    bool converged = true;
    double wall_seconds = 0.0;  // in-memory only, never serialised
};

// Prepares the shared lambda grid once (from replication 0's draw) and runs
// replications with per-(seed, rep) derived RNG streams, so results are
// independent of execution order.
class ScenarioRunner {
public:
    explicit ScenarioRunner(const Scenario& sc);

    const Scenario& scenario() const { return sc_; }
    const std::vector<double>& shared_grid() const { return grid_; }
    const PiecewiseSignal& truth() const { return truth_; }

    ReplicationRecord run_replication(int rep_index) const;
    std::vector<ReplicationRecord> run_all(int workers = 1) const;

private:
    Scenario sc_;
    PiecewiseSignal truth_;
    std::vector<double> grid_;
};

// Convenience one-shot form (constructs a runner internally).
ReplicationRecord run_replication(const Scenario& sc, int rep_index);

struct MetricSummary {
    double mean = 0.0;
    double sd = 0.0;
};

// Keys are "method.metric", e.g. "flmtf.count_error"; map ordering keeps
// serialisation deterministic.
struct AggregateTable {
    std::map<std::string, MetricSummary> values;
    int replications = 0;
};

// Sample mean and sd (n-1 denominator) per metric per method; >= 2 records.
AggregateTable aggregate(const std::vector<ReplicationRecord>& records);

// Two-decimal "mean (sd)" rendering used in reports.
std::string format_mean_sd(const MetricSummary& s);

void write_records_csv(const std::string& path,
                       const std::vector<ReplicationRecord>& records);

// Versioned JSON document with the scenario and "mean (sd)" fields.
std::string aggregate_json_string(const Scenario& sc, const AggregateTable& table);

}  // namespace pcreg
