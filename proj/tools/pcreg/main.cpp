// Command-line front end: fit, detect, simulate, ric. Artifacts are CSV,
// versioned JSON, and a static SVG panel; exit codes are 0 (success),
// 1 (runtime or convergence failure), 2 (usage error).
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcreg/csv.hpp"
#include "pcreg/design.hpp"
#include "pcreg/errors.hpp"
#include "pcreg/metrics.hpp"
#include "pcreg/postprocess.hpp"
#include "pcreg/ric.hpp"
#include "pcreg/rng.hpp"
#include "pcreg/signal.hpp"
#include "pcreg/sim.hpp"
#include "pcreg/solver.hpp"
#include "pcreg/tuning.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pcreg;

namespace {

// ---------------------------------------------------------------------------
// Config file + environment plumbing. Precedence: flag > config > env > default.

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parameter_error("cannot open config file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw parameter_error("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw parameter_error("config file must hold a JSON object");
    return doc;
}

std::optional<uint64_t> env_u64(const char* name) {
    const char* raw = std::getenv(name);
    if (raw == nullptr || *raw == '\0') return std::nullopt;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(raw, &end, 10);
    if (end == raw || *end != '\0')
        throw parameter_error(std::string(name) + " must be a non-negative integer");
    return static_cast<uint64_t>(v);
}

// Applies one subcommand's config section under the flag-wins rule and
// rejects unknown keys so typos never pass silently.
class Merger {
public:
    Merger(CLI::App* cmd, const json& root, const std::string& section)
        : cmd_(cmd) {
        if (root.is_object() && root.contains(section)) {
            if (!root.at(section).is_object())
                throw parameter_error("config section \"" + section + "\" must be an object");
            sec_ = root.at(section);
        }
        if (root.is_object() && root.contains("seed")) top_seed_ = root.at("seed");
        if (root.is_object() && root.contains("workers")) top_workers_ = root.at("workers");
    }

    template <typename T>
    void merge(const std::string& key, T& var) {
        known_.insert(key);
        if (flag_given(key)) return;
        if (sec_.contains(key)) var = fetch<T>(sec_.at(key), key);
    }

    // seed/workers also honour a top-level config value and the environment.
    void merge_seed(uint64_t& var) {
        known_.insert("seed");
        if (flag_given("seed")) return;
        if (sec_.contains("seed")) { var = fetch<uint64_t>(sec_.at("seed"), "seed"); return; }
        if (!top_seed_.is_null()) { var = fetch<uint64_t>(top_seed_, "seed"); return; }
        if (auto e = env_u64("PCREG_SEED")) var = *e;
    }

    void merge_workers(int& var) {
        known_.insert("workers");
        if (flag_given("workers")) return;
        if (sec_.contains("workers")) { var = fetch<int>(sec_.at("workers"), "workers"); return; }
        if (!top_workers_.is_null()) { var = fetch<int>(top_workers_, "workers"); return; }
        if (auto e = env_u64("PCREG_WORKERS")) var = static_cast<int>(*e);
    }

    // Given by flag or by config: drives required/exclusive checks.
    bool provided(const std::string& key) const {
        return flag_given(key) || sec_.contains(key);
    }

    void finish() const {
        for (const auto& item : sec_.items())
            if (known_.find(item.key()) == known_.end())
                throw parameter_error("unknown config key \"" + item.key() + "\"");
    }

private:
    bool flag_given(const std::string& key) const {
        const std::string flag = "--" + key;
        return cmd_->count_all() > 0 && cmd_->count(flag) > 0;
    }

    template <typename T>
    static T fetch(const json& v, const std::string& key) {
        try {
            return v.get<T>();
        } catch (const json::exception&) {
            throw parameter_error("config key \"" + key + "\" has the wrong type");
        }
    }

    CLI::App* cmd_;
    json sec_ = json::object();
    json top_seed_;
    json top_workers_;
    std::set<std::string> known_;
};

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw numeric_error("cannot open file for writing: " + path.string());
    out << text;
}

void emit(const fs::path& out_dir, const std::string& name, const std::string& text) {
    fs::create_directories(out_dir);
    write_text_file(out_dir / name, text);
    std::fprintf(stderr, "wrote %s\n", (out_dir / name).string().c_str());
}

json int_list(const std::vector<int>& v) { return json(v); }

json double_list(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

void standardise_columns(Eigen::MatrixXd& m) {
    const auto n = static_cast<double>(m.rows());
    if (m.rows() < 2) throw parameter_error("standardise needs at least 2 rows");
    for (int j = 0; j < m.cols(); ++j) {
        const double mean = m.col(j).mean();
        m.col(j).array() -= mean;
        const double sd = std::sqrt(m.col(j).squaredNorm() / (n - 1.0));
        if (sd <= 0)
            throw parameter_error("standardise: column " + std::to_string(j + 1) +
                                  " is constant");
        m.col(j) /= sd;
    }
}

// ---------------------------------------------------------------------------
// fit

struct DataOptions {
    std::string design_path;
    std::string response_path;
    int response_col = 0;  // 1-based; 0 = unset
    bool standardise = false;
};

LoadedData load_fit_data(const DataOptions& d, bool response_col_given) {
    if (!d.response_path.empty()) {
        if (response_col_given)
            throw parameter_error("--response and --response-col conflict");
        CsvTable design = read_csv(d.design_path);
        CsvTable resp = read_csv(d.response_path);
        if (resp.data.cols() != 1)
            throw parameter_error("response file must have exactly one column");
        if (resp.data.rows() != design.data.rows())
            throw dimension_error("design and response row counts differ");
        if (d.standardise) standardise_columns(design.data);
        LoadedData out;
        out.design = DesignMatrix{std::move(design.data), DesignFamily::External,
                                  -1, std::nullopt, false};
        out.response = resp.data.col(0);
        return out;
    }
    LoadOptions opts;
    if (response_col_given) opts.response_col = d.response_col;
    opts.standardise = d.standardise;
    return load_csv(d.design_path, opts);
}

int cmd_fit(CLI::App* cmd, const json& config_doc, const fs::path& out_dir,
            DataOptions& data, double lambda1, double lambda2, double constrained_v,
            int cv_size, int folds, bool sparse, SolverConfig solver, uint64_t seed) {
    Merger m(cmd, config_doc, "fit");
    m.merge("design", data.design_path);
    m.merge("response", data.response_path);
    m.merge("response-col", data.response_col);
    m.merge("standardise", data.standardise);
    m.merge("lambda1", lambda1);
    m.merge("lambda2", lambda2);
    m.merge("constrained-V", constrained_v);
    m.merge("cv", cv_size);
    m.merge("folds", folds);
    m.merge("sparse", sparse);
    m.merge("max-iters", solver.max_iters);
    m.merge("abs-tol", solver.abs_tol);
    m.merge("rel-tol", solver.rel_tol);
    m.merge_seed(seed);
    m.finish();

    if (data.design_path.empty()) throw parameter_error("fit: --design is required");
    const bool has_l2 = m.provided("lambda2");
    const bool has_v = m.provided("constrained-V");
    const bool has_cv = m.provided("cv");
    if (has_l2 + has_v + has_cv != 1)
        throw parameter_error("fit: give exactly one of --lambda2, --constrained-V, --cv");
    if (m.provided("lambda1") && !has_l2)
        throw parameter_error("fit: --lambda1 needs --lambda2 (use --sparse with --cv)");
    if (sparse && !has_cv) throw parameter_error("fit: --sparse needs --cv");

    const LoadedData loaded = load_fit_data(data, m.provided("response-col"));
    const DesignMatrix& A = loaded.design;
    const Eigen::VectorXd& y = loaded.response;

    json doc;
    doc["schema"] = "pcreg-fit";
    doc["version"] = 1;
    doc["n"] = A.n();
    doc["p"] = A.p();
    doc["family"] = family_name(A.family);
    doc["standardised"] = data.standardise;

    EstimatorFit fit;
    if (has_v) {
        if (constrained_v < 0) throw parameter_error("fit: --constrained-V must be >= 0");
        fit = constrained_fused_lasso(A, y, constrained_v, solver);
        doc["constrained_v"] = constrained_v;
    } else if (has_cv) {
        if (cv_size < 2) throw parameter_error("fit: --cv grid size must be >= 2");
        const double lmax = lambda_max_search(A, y, solver);
        const std::vector<double> grid = lambda_grid(lmax, cv_size);
        const EstimatorKind kind = sparse ? EstimatorKind::SparseFL : EstimatorKind::FL;
        const CvResult cv = cross_validate(A, y, grid, folds, kind, seed, solver);
        fit = sparse ? sparse_fused_lasso(A, y, cv.lambda1, cv.lambda2, solver)
                     : fused_lasso(A, y, cv.lambda2, solver);
        json cvj;
        cvj["folds"] = folds;
        cvj["grid"] = cv.grid;
        cvj["curve"] = cv.curve;
        cvj["lambda2"] = cv.lambda2;
        cvj["lambda1"] = cv.lambda1;
        cvj["lambda1_over_lambda2"] = cv.lambda1_over_lambda2;
        doc["cv"] = cvj;
    } else {
        if (lambda2 < 0 || lambda1 < 0)
            throw parameter_error("fit: penalties must be >= 0");
        fit = lambda1 > 0 ? sparse_fused_lasso(A, y, lambda1, lambda2, solver)
                          : fused_lasso(A, y, lambda2, solver);
    }

    doc["lambda1"] = fit.lambda1;
    doc["lambda2"] = fit.lambda2;
    doc["objective"] = fit.objective;
    doc["iterations"] = fit.iterations;
    doc["converged"] = fit.converged;
    doc["achieved_tv"] = fit.achieved_tv;
    doc["achieved_l1"] = fit.achieved_l1;
    doc["kkt_residual"] = kkt_residual(A, y, fit.coefficients, fit.lambda1, fit.lambda2);
    doc["coefficients_path"] = "coefficients.csv";

    fs::create_directories(out_dir);
    write_vector_csv((out_dir / "coefficients.csv").string(), fit.coefficients,
                     "coefficient");
    std::fprintf(stderr, "wrote %s\n", (out_dir / "coefficients.csv").string().c_str());
    const std::string text = doc.dump(2) + "\n";
    emit(out_dir, "fit.json", text);
    std::fputs(text.c_str(), stdout);
    return fit.converged ? 0 : 1;
}

// ---------------------------------------------------------------------------
// detect

int cmd_detect(CLI::App* cmd, const json& config_doc, const fs::path& out_dir,
               std::string coef_path, DataOptions& data, double lambda2, int cv_size,
               int folds, int bandwidth, double tau, bool tau_max, int permutations,
               double alpha, int gap, SolverConfig solver, uint64_t seed) {
    Merger m(cmd, config_doc, "detect");
    m.merge("coefficients", coef_path);
    m.merge("design", data.design_path);
    m.merge("response", data.response_path);
    m.merge("response-col", data.response_col);
    m.merge("standardise", data.standardise);
    m.merge("lambda2", lambda2);
    m.merge("cv", cv_size);
    m.merge("folds", folds);
    m.merge("bandwidth", bandwidth);
    m.merge("tau", tau);
    m.merge("tau-max", tau_max);
    m.merge("permutations", permutations);
    m.merge("alpha", alpha);
    m.merge("gap", gap);
    m.merge_seed(seed);
    m.finish();

    const bool from_file = m.provided("coefficients");
    const bool from_fit = m.provided("design");
    if (from_file == from_fit)
        throw parameter_error("detect: give exactly one of --coefficients or --design");

    Eigen::VectorXd xhat;
    bool fit_converged = true;
    double fit_lambda2 = 0.0;
    if (from_file) {
        const CsvTable t = read_csv(coef_path);
        if (t.data.cols() != 1)
            throw parameter_error("coefficients file must have exactly one column");
        xhat = t.data.col(0);
    } else {
        if (m.provided("lambda2") == m.provided("cv"))
            throw parameter_error("detect: embedded fit needs exactly one of --lambda2, --cv");
        const LoadedData loaded = load_fit_data(data, m.provided("response-col"));
        if (m.provided("cv")) {
            if (cv_size < 2) throw parameter_error("detect: --cv grid size must be >= 2");
            const double lmax = lambda_max_search(loaded.design, loaded.response, solver);
            const CvResult cv = cross_validate(loaded.design, loaded.response,
                                               lambda_grid(lmax, cv_size), folds,
                                               EstimatorKind::FL, seed, solver);
            lambda2 = cv.lambda2;
        }
        const EstimatorFit fit = fused_lasso(loaded.design, loaded.response, lambda2, solver);
        xhat = fit.coefficients;
        fit_converged = fit.converged;
        fit_lambda2 = fit.lambda2;
    }

    const int p = static_cast<int>(xhat.size());
    const int b = m.provided("bandwidth") ? bandwidth : default_bandwidth(p);
    if (b < 1 || 2 * b > p)
        throw parameter_error("detect: bandwidth must satisfy 1 <= b and 2b <= p");
    const int t_gap = m.provided("gap") ? gap : 2 * b;

    std::string tau_rule;
    TauResult tr;
    if (m.provided("tau")) {
        if (tau_max || m.provided("permutations") || m.provided("alpha"))
            throw parameter_error("detect: --tau conflicts with permutation options");
        if (tau <= 0) throw parameter_error("detect: --tau must be > 0");
        tr = {tau, false};
        tau_rule = "fixed";
    } else if (tau_max) {
        tr = permutation_tau(xhat, b, permutations, alpha, seed);
        tau_rule = "permutation-max";
    } else {
        tr = permutation_tau_pooled(xhat, b, permutations, alpha, seed);
        tau_rule = "permutation-pooled";
    }

    ChangePointReport report;
    report.config = {b, tr.tau, t_gap};
    report.raw = change_points_tol(xhat, kSolverChangeTol);
    report.filtered = tr.no_signal ? std::vector<int>{}
                                   : mean_filter(xhat, b, tr.tau, report.raw);
    report.pruned = time_filter(report.filtered, t_gap);

    json doc;
    doc["schema"] = "pcreg-report";
    doc["version"] = 1;
    doc["p"] = p;
    doc["bandwidth"] = b;
    doc["tau"] = tr.tau;
    doc["tau_rule"] = tau_rule;
    if (tau_rule != "fixed") {
        doc["permutations"] = permutations;
        doc["alpha"] = alpha;
    }
    doc["gap"] = t_gap;
    doc["no_signal"] = tr.no_signal;
    if (from_fit) {
        doc["fit_lambda2"] = fit_lambda2;
        doc["fit_converged"] = fit_converged;
    }
    doc["raw"] = int_list(report.raw);
    doc["filtered"] = int_list(report.filtered);
    doc["pruned"] = int_list(report.pruned);

    const std::string text = doc.dump(2) + "\n";
    emit(out_dir, "report.json", text);
    std::fputs(text.c_str(), stdout);
    return fit_converged ? 0 : 1;
}

// ---------------------------------------------------------------------------
// simulate

std::string svg_metrics_panel(const AggregateTable& table) {
    struct Panel {
        const char* title;
        const char* metric;
    };
    const Panel panels[3] = {{"mse", "coef_sq_error_per_p"},
                             {"hausdorff", "hausdorff"},
                             {"count error", "count_error"}};
    const char* methods[3] = {"fl", "flmf", "flmtf"};
    const char* labels[3] = {"FL", "FLMF", "FLMTF"};
    const char* fills[3] = {"#4c78a8", "#f58518", "#54a24b"};

    const double panel_w = 280, panel_h = 250, pad = 20, base_y = 210, top_y = 40;
    char buf[256];
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"280\" "
           "viewBox=\"0 0 900 280\" font-family=\"sans-serif\">\n";
    svg += "<!-- pcreg-metrics-svg v1 -->\n";
    svg += "<rect width=\"900\" height=\"280\" fill=\"white\"/>\n";
    for (int pi = 0; pi < 3; ++pi) {
        const double x0 = pad + pi * (panel_w + 20);
        double scale_max = 0.0;
        for (const char* method : methods) {
            const auto& s = table.values.at(std::string(method) + "." + panels[pi].metric);
            scale_max = std::max(scale_max, s.mean + s.sd);
        }
        if (scale_max <= 0) scale_max = 1.0;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.1f\" y=\"25\" font-size=\"15\" "
                      "text-anchor=\"middle\">%s</text>\n",
                      x0 + panel_w / 2, panels[pi].title);
        svg += buf;
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                      "stroke=\"#333\"/>\n",
                      x0, base_y, x0 + panel_w, base_y);
        svg += buf;
        for (int mi = 0; mi < 3; ++mi) {
            const auto& s =
                table.values.at(std::string(methods[mi]) + "." + panels[pi].metric);
            const double slot = panel_w / 3.0;
            const double bw = slot * 0.6;
            const double bx = x0 + mi * slot + (slot - bw) / 2.0;
            const double h = (base_y - top_y) * (s.mean / scale_max);
            const double by = base_y - h;
            std::snprintf(buf, sizeof(buf),
                          "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
                          "fill=\"%s\"/>\n",
                          bx, by, bw, h, fills[mi]);
            svg += buf;
            const double whisker_top = base_y - (base_y - top_y) *
                                                    std::min(1.0, (s.mean + s.sd) / scale_max);
            const double whisker_bot =
                base_y - (base_y - top_y) * std::max(0.0, (s.mean - s.sd) / scale_max);
            std::snprintf(buf, sizeof(buf),
                          "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                          "stroke=\"#333\"/>\n",
                          bx + bw / 2, whisker_top, bx + bw / 2, whisker_bot);
            svg += buf;
            std::snprintf(buf, sizeof(buf),
                          "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" "
                          "text-anchor=\"middle\">%.2f</text>\n",
                          bx + bw / 2, by - 6 < 36.0 ? 36.0 : by - 6, s.mean);
            svg += buf;
            std::snprintf(buf, sizeof(buf),
                          "<text x=\"%.2f\" y=\"%.1f\" font-size=\"12\" "
                          "text-anchor=\"middle\">%s</text>\n",
                          bx + bw / 2, base_y + 18, labels[mi]);
            svg += buf;
        }
    }
    (void)panel_h;
    svg += "</svg>\n";
    return svg;
}

int cmd_simulate(CLI::App* cmd, const json& config_doc, const fs::path& out_dir,
                 std::string preset, std::string family, std::string layout, int n,
                 int p, int h, double gamma, double sigma, int reps, uint64_t seed,
                 int workers) {
    Merger m(cmd, config_doc, "simulate");
    m.merge("preset", preset);
    m.merge("family", family);
    m.merge("layout", layout);
    m.merge("n", n);
    m.merge("p", p);
    m.merge("h", h);
    m.merge("gamma", gamma);
    m.merge("sigma", sigma);
    m.merge("reps", reps);
    m.merge_seed(seed);
    m.merge_workers(workers);
    m.finish();

    Scenario sc;
    if (m.provided("preset")) {
        if (m.provided("family") || m.provided("layout"))
            throw parameter_error("simulate: --preset conflicts with --family/--layout");
        const auto found = preset_scenario(preset);
        if (!found) {
            std::string msg = "unknown preset \"" + preset + "\"; presets are:";
            for (const auto& name : preset_names()) msg += "\n  " + name;
            throw parameter_error(msg);
        }
        sc = *found;
    } else {
        if (m.provided("family")) {
            if (family == "identity") sc.family = DesignFamily::Identity;
            else if (family == "band") sc.family = DesignFamily::Band;
            else if (family == "gaussian") sc.family = DesignFamily::GaussianIdentity;
            else if (family == "gaussian-bandcov") sc.family = DesignFamily::GaussianBandCov;
            else throw parameter_error("simulate: unknown family \"" + family + "\"");
        }
        if (m.provided("layout")) {
            if (layout == "one-cp") sc.layout = CpLayout::OneCP;
            else if (layout == "nine-equal") sc.layout = CpLayout::NineEqual;
            else if (layout == "nine-unequal") sc.layout = CpLayout::NineUnequal;
            else throw parameter_error("simulate: unknown layout \"" + layout + "\"");
        }
    }
    if (m.provided("n")) sc.n = n;
    if (m.provided("p")) sc.p = p;
    if (m.provided("h")) sc.h = h;
    if (m.provided("gamma")) sc.gamma = gamma;
    if (m.provided("sigma")) sc.sigma = sigma;
    if (m.provided("reps")) sc.replications = reps;
    sc.seed = seed;
    if (workers < 1) throw parameter_error("simulate: --workers must be >= 1");

    const ScenarioRunner runner(sc);
    const std::vector<ReplicationRecord> records = runner.run_all(workers);

    fs::create_directories(out_dir);
    write_records_csv((out_dir / "replications.csv").string(), records);
    std::fprintf(stderr, "wrote %s\n", (out_dir / "replications.csv").string().c_str());

    const AggregateTable table = aggregate(records);
    const std::string text = aggregate_json_string(runner.scenario(), table);
    emit(out_dir, "aggregate.json", text);
    emit(out_dir, "metrics.svg", svg_metrics_panel(table));
    std::fputs(text.c_str(), stdout);
    return 0;
}

// ---------------------------------------------------------------------------
// ric

int cmd_ric(CLI::App* cmd, const json& config_doc, const fs::path& out_dir,
            std::string design_path, std::string family, int n, int p, int h,
            bool row_scaled, double t, int samples, double zeta, double margin,
            uint64_t seed) {
    Merger m(cmd, config_doc, "ric");
    m.merge("design", design_path);
    m.merge("family", family);
    m.merge("n", n);
    m.merge("p", p);
    m.merge("h", h);
    m.merge("row-scaled", row_scaled);
    m.merge("t", t);
    m.merge("samples", samples);
    m.merge("zeta", zeta);
    m.merge("margin", margin);
    m.merge_seed(seed);
    m.finish();

    if (!m.provided("t")) throw parameter_error("ric: --t is required");
    if (t < 0) throw parameter_error("ric: --t must be >= 0");
    if (samples < 1) throw parameter_error("ric: --samples must be >= 1");

    DesignMatrix A;
    if (m.provided("design")) {
        if (m.provided("family") || m.provided("n") || m.provided("p"))
            throw parameter_error("ric: --design conflicts with --family/--n/--p");
        CsvTable csv = read_csv(design_path);
        A = DesignMatrix{std::move(csv.data), DesignFamily::External, -1, std::nullopt,
                         false};
        if (row_scaled) {
            A.data *= 1.0 / std::sqrt(static_cast<double>(A.data.rows()));
            A.row_scaled = true;
        }
    } else {
        if (family == "identity") {
            A = identity_design(p);
        } else if (family == "band") {
            A = band_design(n, p, h, derive_seed(seed, 1000));
        } else if (family == "gaussian") {
            A = gaussian_design(n, p, {CovarianceSpec::Kind::Identity, 0},
                                derive_seed(seed, 1000), row_scaled);
        } else if (family == "gaussian-bandcov") {
            A = gaussian_design(n, p, {CovarianceSpec::Kind::BandTaper, h},
                                derive_seed(seed, 1000), row_scaled);
        } else {
            throw parameter_error("ric: unknown family \"" + family + "\"");
        }
    }

    RicCertificate cert = empirical_ric(A, t, samples, seed);
    if (m.provided("zeta")) check_interval(cert, zeta, margin);

    json doc;
    doc["schema"] = "pcreg-certificate";
    doc["version"] = 1;
    doc["n"] = A.n();
    doc["p"] = A.p();
    doc["family"] = family_name(A.family);
    doc["row_scaled"] = A.row_scaled;
    doc["t"] = cert.t;
    doc["samples"] = cert.samples;
    doc["seed"] = seed;
    doc["min_norm"] = cert.min_norm;
    doc["max_norm"] = cert.max_norm;
    if (cert.zeta) {
        doc["zeta"] = *cert.zeta;
        doc["margin"] = margin;
        doc["interval_ok"] = *cert.interval_ok;
    }
    doc["min_witness"] = double_list(cert.min_witness);
    doc["max_witness"] = double_list(cert.max_witness);

    const std::string text = doc.dump(2) + "\n";
    emit(out_dir, "certificate.json", text);
    std::fputs(text.c_str(), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"piecewise-constant regression: fused-lasso fitting, change-point "
                 "detection, simulation, and design conditioning checks"};
    app.require_subcommand(1);

    // Shared storage; each subcommand binds its own subset.
    std::string config_path, out_str = ".";
    DataOptions data;
    std::string coef_path, preset, family = "gaussian", layout, ric_design_path;
    double lambda1 = 0, lambda2 = 0, constrained_v = 0, tau = 0, alpha = 0.05;
    double gamma = 1, sigma = 1, t_budget = 0, zeta = 0, margin = 0.1;
    int cv_size = 50, folds = 5, bandwidth = 0, permutations = 100, gap = 0;
    int n = 500, p = 1000, h = 10, reps = 0, samples = 200, workers = 1;
    bool sparse = false, tau_max = false, row_scaled = false;
    uint64_t seed = 1;
    SolverConfig solver;

    app.set_help_flag("--help", "print usage");
    auto add_common = [&](CLI::App* c) {
        c->set_help_flag("--help", "print usage");
        c->add_option("--config", config_path, "JSON config file; flags override it");
        c->add_option("--out", out_str, "output directory (default .)");
        c->add_option("--seed", seed, "RNG seed (env PCREG_SEED)");
    };

    CLI::App* fit = app.add_subcommand("fit", "fit a fused-lasso model to CSV data");
    add_common(fit);
    fit->add_option("--design", data.design_path, "design CSV (or combined with response)");
    fit->add_option("--response", data.response_path, "response CSV, one column");
    fit->add_option("--response-col", data.response_col, "1-based response column");
    fit->add_flag("--standardise", data.standardise, "columns to mean 0, sd 1");
    fit->add_option("--lambda1", lambda1, "l1 penalty weight");
    fit->add_option("--lambda2", lambda2, "fusion penalty weight");
    fit->add_option("--constrained-V", constrained_v, "solve with ||Dx||_1 <= V");
    fit->add_option("--cv", cv_size, "cross-validate over a grid of this size");
    fit->add_option("--folds", folds, "CV folds");
    fit->add_flag("--sparse", sparse, "CV the sparse variant (l1 rides the grid)");
    fit->add_option("--max-iters", solver.max_iters, "solver iteration cap");
    fit->add_option("--abs-tol", solver.abs_tol, "solver absolute tolerance");
    fit->add_option("--rel-tol", solver.rel_tol, "solver relative tolerance");

    CLI::App* detect = app.add_subcommand("detect", "localise change points");
    add_common(detect);
    detect->add_option("--coefficients", coef_path, "fitted coefficients CSV");
    detect->add_option("--design", data.design_path, "design CSV for an embedded fit");
    detect->add_option("--response", data.response_path, "response CSV");
    detect->add_option("--response-col", data.response_col, "1-based response column");
    detect->add_flag("--standardise", data.standardise, "columns to mean 0, sd 1");
    detect->add_option("--lambda2", lambda2, "embedded fit fusion penalty");
    detect->add_option("--cv", cv_size, "embedded fit: CV grid size");
    detect->add_option("--folds", folds, "CV folds");
    detect->add_option("--bandwidth", bandwidth, "filter bandwidth b (default rule)");
    detect->add_option("--tau", tau, "fixed threshold (default: permutation)");
    detect->add_flag("--tau-max", tau_max, "max-statistic permutation threshold");
    detect->add_option("--permutations", permutations, "permutation count B");
    detect->add_option("--alpha", alpha, "permutation level");
    detect->add_option("--gap", gap, "time-filter gap t (default 2b)");

    CLI::App* simulate = app.add_subcommand("simulate", "run a replication study");
    add_common(simulate);
    simulate->add_option("--preset", preset, "named scenario");
    simulate->add_option("--family", family, "identity|band|gaussian|gaussian-bandcov");
    simulate->add_option("--layout", layout, "one-cp|nine-equal|nine-unequal");
    simulate->add_option("--n", n, "rows");
    simulate->add_option("--p", p, "coefficients");
    simulate->add_option("--h", h, "design bandwidth");
    simulate->add_option("--gamma", gamma, "jump scale");
    simulate->add_option("--sigma", sigma, "noise level");
    simulate->add_option("--reps", reps, "replications");
    simulate->add_option("--workers", workers, "worker threads (env PCREG_WORKERS)");

    CLI::App* ric = app.add_subcommand("ric", "empirical design-conditioning envelope");
    add_common(ric);
    ric->add_option("--design", ric_design_path, "design CSV");
    ric->add_option("--family", family, "identity|band|gaussian|gaussian-bandcov");
    ric->add_option("--n", n, "rows");
    ric->add_option("--p", p, "coefficients");
    ric->add_option("--h", h, "design bandwidth");
    ric->add_flag("--row-scaled", row_scaled, "scale rows by n^{-1/2}");
    ric->add_option("--t", t_budget, "total-variation budget");
    ric->add_option("--samples", samples, "constraint-set samples");
    ric->add_option("--zeta", zeta, "check the certificate against the interval");
    ric->add_option("--margin", margin, "interval margin (default 0.1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const json config_doc =
            config_path.empty() ? json::object() : load_config_file(config_path);
        const fs::path out_dir(out_str);
        if (fit->parsed())
            return cmd_fit(fit, config_doc, out_dir, data, lambda1, lambda2,
                           constrained_v, cv_size, folds, sparse, solver, seed);
        if (detect->parsed())
            return cmd_detect(detect, config_doc, out_dir, coef_path, data, lambda2,
                              cv_size, folds, bandwidth, tau, tau_max, permutations,
                              alpha, gap, solver, seed);
        if (simulate->parsed())
            return cmd_simulate(simulate, config_doc, out_dir, preset, family, layout,
                                n, p, h, gamma, sigma, reps, seed, workers);
        if (ric->parsed())
            return cmd_ric(ric, config_doc, out_dir, ric_design_path, family, n, p, h,
                           row_scaled, t_budget, samples, zeta, margin, seed);
    } catch (const parameter_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ingest_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
