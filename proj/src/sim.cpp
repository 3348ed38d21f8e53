#include "pcreg/sim.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "pcreg/csv.hpp"
#include "pcreg/errors.hpp"
#include "pcreg/postprocess.hpp"
#include "pcreg/rng.hpp"

namespace pcreg {

std::string layout_name(CpLayout layout) {
    switch (layout) {
        case CpLayout::OneCP: return "one-cp";
        case CpLayout::NineEqual: return "nine-equal";
        case CpLayout::NineUnequal: return "nine-unequal";
    }
    return "unknown";
}

PiecewiseSignal expand_layout(CpLayout layout, double gamma, int p) {
    if (gamma <= 0) throw parameter_error("expand_layout: gamma must be > 0");
    std::vector<int> boundaries;
    Eigen::VectorXd levels;
    const double nine_levels[10] = {0, 1, 0, 1.5, 0, 2, 0, 1.75, 0, 0.75};
    switch (layout) {
        case CpLayout::OneCP:
            boundaries = {p / 2};
            levels.resize(2);
            levels << 0, gamma;
            break;
        case CpLayout::NineEqual:
            for (int i = 1; i <= 9; ++i) boundaries.push_back(i * p / 10);
            levels.resize(10);
            for (int i = 0; i < 10; ++i) levels[i] = gamma * nine_levels[i];
            break;
        case CpLayout::NineUnequal: {
            // Reference boundaries at p = 1000, scaled proportionally.
            const int base[9] = {200, 310, 360, 390, 450, 490, 570, 640, 770};
            for (int v : base)
                boundaries.push_back(static_cast<int>(std::lround(v * p / 1000.0)));
            levels.resize(10);
            for (int i = 0; i < 10; ++i) levels[i] = gamma * nine_levels[i];
            break;
        }
    }
    return make_signal(boundaries, levels, p);
}

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const char* fam : {"identity", "band", "gaussian", "gaussian-bandcov"})
        for (const char* lay : {"one-cp", "nine-equal", "nine-unequal"})
            names.push_back(std::string(fam) + "-" + lay);
    return names;
}

std::optional<Scenario> preset_scenario(const std::string& name) {
    Scenario sc;
    std::string rest;
    if (name.rfind("identity-", 0) == 0) {
        sc.family = DesignFamily::Identity;
        sc.n = sc.p = 1000;
        rest = name.substr(9);
    } else if (name.rfind("band-", 0) == 0) {
        sc.family = DesignFamily::Band;
        sc.n = sc.p = 1000;
        sc.h = 10;
        rest = name.substr(5);
    } else if (name.rfind("gaussian-bandcov-", 0) == 0) {
        sc.family = DesignFamily::GaussianBandCov;
        sc.n = 500;
        sc.p = 1000;
        sc.h = 50;
        rest = name.substr(17);
    } else if (name.rfind("gaussian-", 0) == 0) {
        sc.family = DesignFamily::GaussianIdentity;
        sc.n = 500;
        sc.p = 1000;
        rest = name.substr(9);
    } else {
        return std::nullopt;
    }
    if (rest == "one-cp") sc.layout = CpLayout::OneCP;
    else if (rest == "nine-equal") sc.layout = CpLayout::NineEqual;
    else if (rest == "nine-unequal") sc.layout = CpLayout::NineUnequal;
    else return std::nullopt;
    return sc;
}

namespace {

DesignMatrix draw_design(const Scenario& sc, uint64_t seed) {
    switch (sc.family) {
        case DesignFamily::Identity:
            return identity_design(sc.p);
        case DesignFamily::Band:
            return band_design(sc.n, sc.p, sc.h, seed);
        case DesignFamily::GaussianIdentity: {
            CovarianceSpec cov{CovarianceSpec::Kind::Identity, 0};
            return gaussian_design(sc.n, sc.p, cov, seed, sc.row_scaled);
        }
        case DesignFamily::GaussianBandCov: {
            CovarianceSpec cov{CovarianceSpec::Kind::BandTaper, sc.h};
            return gaussian_design(sc.n, sc.p, cov, seed, sc.row_scaled);
        }
        case DesignFamily::External:
            throw parameter_error("simulate: external designs have no generator");
    }
    throw parameter_error("simulate: unknown design family");
}

struct RepStreams {
    uint64_t design, noise, cv, perm;
};

RepStreams streams_for(uint64_t master, int rep) {
    const uint64_t base = derive_seed(master, static_cast<uint64_t>(rep));
    return {derive_seed(base, 0), derive_seed(base, 1),
            derive_seed(base, 2), derive_seed(base, 3)};
}

std::pair<DesignMatrix, Eigen::VectorXd> draw_data(const Scenario& sc,
                                                   const PiecewiseSignal& truth,
                                                   int rep) {
    const RepStreams st = streams_for(sc.seed, rep);
    DesignMatrix A = draw_design(sc, st.design);
    Rng noise(st.noise);
    Eigen::VectorXd y = A.data * truth.values;
    for (int i = 0; i < y.size(); ++i) y[i] += sc.sigma * noise.normal();
    return {std::move(A), std::move(y)};
}

}  // namespace

ScenarioRunner::ScenarioRunner(const Scenario& sc) : sc_(sc) {
    if (sc_.replications < 1)
        throw parameter_error("scenario: replications must be >= 1");
    if (sc_.family == DesignFamily::Identity) sc_.n = sc_.p;
    truth_ = expand_layout(sc_.layout, sc_.gamma, sc_.p);
    if (!sc_.tuning.lambda_grid.empty()) {
        grid_ = sc_.tuning.lambda_grid;
    } else if (!sc_.per_rep_lambda_max) {
        // Shared grid anchored at replication 0's data.
        auto [A, y] = draw_data(sc_, truth_, 0);
        const double lmax = lambda_max_search(A, y, sc_.solver);
        grid_ = lambda_grid(lmax);
    }
}

ReplicationRecord ScenarioRunner::run_replication(int rep_index) const {
    const auto t0 = std::chrono::steady_clock::now();
    const RepStreams st = streams_for(sc_.seed, rep_index);
    auto [A, y] = draw_data(sc_, truth_, rep_index);

    std::vector<double> grid = grid_;
    if (grid.empty()) {
        const double lmax = lambda_max_search(A, y, sc_.solver);
        grid = lambda_grid(lmax);
    }

    const CvResult cv = cross_validate(A, y, grid, sc_.tuning.folds,
                                       EstimatorKind::FL, st.cv, sc_.solver);
    const EstimatorFit fit = fused_lasso(A, y, cv.lambda2, sc_.solver);

    const int b = sc_.tuning.bandwidth_rule.resolve(sc_.p);
    const int gap = sc_.tuning.gap_rule.resolve(b);
    const TauResult tau = sc_.tuning.tau_rule.resolve(fit.coefficients, b, st.perm);

    ChangePointReport report;
    report.config = {b, tau.tau, gap};
    report.raw = change_points_tol(fit.coefficients, kSolverChangeTol);
    report.filtered = tau.no_signal
                          ? std::vector<int>{}
                          : mean_filter(fit.coefficients, b, tau.tau, report.raw);
    report.pruned = time_filter(report.filtered, gap);

    const std::vector<int> true_set = truth_.change_points;
    ReplicationRecord rec;
    rec.rep_index = rep_index;
    rec.fl = evaluate_at(fit.coefficients, truth_.values, report.raw, true_set, sc_.p);
    rec.flmf = evaluate_at(fit.coefficients, truth_.values, report.filtered, true_set, sc_.p);
    rec.flmtf = evaluate_at(fit.coefficients, truth_.values, report.pruned, true_set, sc_.p);
    rec.lambda1 = cv.lambda1;
    rec.lambda2 = cv.lambda2;
    rec.tau = tau.tau;
    rec.no_signal = tau.no_signal;
    rec.bandwidth = b;
    rec.gap = gap;
    rec.converged = fit.converged;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

std::vector<ReplicationRecord> ScenarioRunner::run_all(int workers) const {
    const int reps = sc_.replications;
    std::vector<ReplicationRecord> records(static_cast<size_t>(reps));
    workers = std::max(1, std::min(workers, reps));
    if (workers == 1) {
        for (int r = 0; r < reps; ++r) records[static_cast<size_t>(r)] = run_replication(r);
        return records;
    }
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= reps) return;
            records[static_cast<size_t>(r)] = run_replication(r);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return records;
}

ReplicationRecord run_replication(const Scenario& sc, int rep_index) {
    return ScenarioRunner(sc).run_replication(rep_index);
}

namespace {

const std::vector<std::pair<std::string, double EvalResult::*>>& metric_fields() {
    static const std::vector<std::pair<std::string, double EvalResult::*>> fields = {
        {"coef_sq_error", &EvalResult::coef_sq_error},
        {"coef_sq_error_per_p", &EvalResult::coef_sq_error_per_p},
        {"d_est_given_true", &EvalResult::d_est_given_true},
        {"d_true_given_est", &EvalResult::d_true_given_est},
        {"hausdorff", &EvalResult::hausdorff_dist},
    };
    return fields;
}

const std::vector<std::pair<std::string, const EvalResult ReplicationRecord::*>>& stages() {
    static const std::vector<std::pair<std::string, const EvalResult ReplicationRecord::*>> s = {
        {"fl", &ReplicationRecord::fl},
        {"flmf", &ReplicationRecord::flmf},
        {"flmtf", &ReplicationRecord::flmtf},
    };
    return s;
}

MetricSummary summarise(const std::vector<double>& values) {
    const auto n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

}  // namespace

AggregateTable aggregate(const std::vector<ReplicationRecord>& records) {
    if (records.size() < 2)
        throw parameter_error("aggregate: sample sd needs at least 2 records");
    AggregateTable table;
    table.replications = static_cast<int>(records.size());
    std::vector<double> values(records.size());
    for (const auto& [stage_name, stage_ptr] : stages()) {
        for (const auto& [metric_name, metric_ptr] : metric_fields()) {
            for (size_t r = 0; r < records.size(); ++r)
                values[r] = records[r].*stage_ptr.*metric_ptr;
            table.values[stage_name + "." + metric_name] = summarise(values);
        }
        for (size_t r = 0; r < records.size(); ++r)
            values[r] = static_cast<double>((records[r].*stage_ptr).count_error);
        table.values[stage_name + ".count_error"] = summarise(values);
    }
    return table;
}

std::string format_mean_sd(const MetricSummary& s) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f (%.2f)", s.mean, s.sd);
    return buf;
}

void write_records_csv(const std::string& path,
                       const std::vector<ReplicationRecord>& records) {
    std::ofstream out(path);
    if (!out) throw numeric_error("cannot open file for writing: " + path);
    out << "rep,lambda1,lambda2,tau,no_signal,bandwidth,gap,converged";
    for (const auto& [stage_name, stage_ptr] : stages()) {
        (void)stage_ptr;
        for (const auto& [metric_name, metric_ptr] : metric_fields()) {
            (void)metric_ptr;
            out << ',' << stage_name << '_' << metric_name;
        }
        out << ',' << stage_name << "_count_error";
    }
    out << '\n';
    for (const auto& rec : records) {
        out << rec.rep_index << ',' << format_double(rec.lambda1) << ','
            << format_double(rec.lambda2) << ',' << format_double(rec.tau) << ','
            << (rec.no_signal ? 1 : 0) << ',' << rec.bandwidth << ',' << rec.gap << ','
            << (rec.converged ? 1 : 0);
        for (const auto& [stage_name, stage_ptr] : stages()) {
            (void)stage_name;
            const EvalResult& ev = rec.*stage_ptr;
            for (const auto& [metric_name, metric_ptr] : metric_fields()) {
                (void)metric_name;
                out << ',' << format_double(ev.*metric_ptr);
            }
            out << ',' << ev.count_error;
        }
        out << '\n';
    }
}

std::string aggregate_json_string(const Scenario& sc, const AggregateTable& table) {
    nlohmann::json doc;
    doc["schema"] = "pcreg-aggregate";
    doc["version"] = 1;
    nlohmann::json scj;
    scj["family"] = family_name(sc.family);
    scj["n"] = sc.n;
    scj["p"] = sc.p;
    if (sc.family == DesignFamily::Band || sc.family == DesignFamily::GaussianBandCov)
        scj["h"] = sc.h;
    scj["layout"] = layout_name(sc.layout);
    scj["gamma"] = sc.gamma;
    scj["sigma"] = sc.sigma;
    scj["replications"] = sc.replications;
    scj["seed"] = sc.seed;
    scj["row_scaled"] = sc.row_scaled;
    doc["scenario"] = scj;
    nlohmann::json formatted, numeric;
    for (const auto& [key, summary] : table.values) {
        const auto dot = key.find('.');
        const std::string stage = key.substr(0, dot);
        const std::string metric = key.substr(dot + 1);
        formatted[stage][metric] = format_mean_sd(summary);
        numeric[stage][metric] = {{"mean", summary.mean}, {"sd", summary.sd}};
    }
    doc["results"] = formatted;
    doc["results_numeric"] = numeric;
    return doc.dump(2) + "\n";
}

}  // namespace pcreg
