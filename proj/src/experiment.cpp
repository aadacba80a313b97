#include "raresim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace raresim {

namespace {

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

[[noreturn]] void bad_key(const std::string& path, const std::string& what) {
    throw std::invalid_argument("config: " + path + ": " + what);
}

void expect_keys(const json& obj, const std::string& prefix,
                 const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key()))
            bad_key(prefix.empty() ? it.key() : prefix + "." + it.key(),
                    "unknown key");
    }
}

double get_number(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) bad_key(key, "expected a number");
    return obj[key].get<double>();
}

std::size_t get_uint(const json& obj, const std::string& key,
                     std::size_t fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_unsigned())
        bad_key(key, "expected a non-negative integer");
    return obj[key].get<std::size_t>();
}

}  // namespace

void ExperimentSpec::validate() const {
    if (n_runs < 1) throw std::invalid_argument("config: n_runs: must be >= 1");
    if (p0_sweep.empty() && !(base.p0 > 0.0 && base.p0 < 1.0))
        throw std::invalid_argument("config: p0: must lie in (0,1)");
    for (double p : p0_sweep)
        if (!(p > 0.0 && p < 1.0))
            throw std::invalid_argument("config: sweep.p0: must lie in (0,1)");
    for (std::size_t n : N_sweep)
        if (n < 10)
            throw std::invalid_argument("config: sweep.N: must be >= 10");
    if (ref_pf && !(*ref_pf > 0.0 && *ref_pf < 1.0))
        throw std::invalid_argument("config: ref_pf: must lie in (0,1)");
}

std::vector<std::uint64_t> ExperimentSpec::run_seeds() const {
    if (!seeds.empty()) return seeds;
    std::vector<std::uint64_t> out(n_runs);
    for (std::size_t i = 0; i < n_runs; ++i) out[i] = base.seed + i;
    return out;
}

std::vector<RunMode> ExperimentSpec::run_modes() const {
    return modes.empty() ? std::vector<RunMode>{base.mode} : modes;
}

ExperimentSpec parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") +
                                    e.what());
    }
    if (!doc.is_object())
        throw std::invalid_argument("config: top level must be an object");

    expect_keys(doc, "",
                {"benchmark", "d", "kappa", "tau", "nu", "threshold_shift",
                 "pca_realizations", "pca_seed", "mode", "modes", "N", "p0",
                 "seed", "seeds", "n_runs", "sweep", "ref_pf", "out",
                 "threads", "N0", "high_dim", "max_levels", "lambda0",
                 "adapt_window", "warm_fraction", "gamma_T", "policy",
                 "correction", "gp", "pls"});

    ExperimentSpec spec;
    RunConfig& cfg = spec.base;

    if (doc.contains("benchmark")) {
        if (!doc["benchmark"].is_string()) bad_key("benchmark", "expected a string");
        cfg.benchmark = doc["benchmark"].get<std::string>();
    }
    const auto ids = benchmark_ids();
    if (std::find(ids.begin(), ids.end(), cfg.benchmark) == ids.end())
        bad_key("benchmark", "unknown benchmark id \"" + cfg.benchmark + "\"");

    cfg.bench.d = get_uint(doc, "d", cfg.bench.d);
    if (cfg.bench.d < 1) bad_key("d", "must be >= 1");
    cfg.bench.kappa = get_number(doc, "kappa", cfg.bench.kappa);
    cfg.bench.tau = get_number(doc, "tau", cfg.bench.tau);
    cfg.bench.nu = get_number(doc, "nu", cfg.bench.nu);
    cfg.bench.threshold_shift =
        get_number(doc, "threshold_shift", cfg.bench.threshold_shift);
    cfg.bench.pca_realizations =
        get_uint(doc, "pca_realizations", cfg.bench.pca_realizations);
    cfg.bench.pca_seed = get_uint(doc, "pca_seed", cfg.bench.pca_seed);

    if (doc.contains("mode")) {
        if (!doc["mode"].is_string()) bad_key("mode", "expected a string");
        try {
            cfg.mode = run_mode_from_string(doc["mode"].get<std::string>());
        } catch (const std::invalid_argument& e) {
            bad_key("mode", e.what());
        }
    }
    if (doc.contains("modes")) {
        if (!doc["modes"].is_array()) bad_key("modes", "expected an array");
        for (const auto& m : doc["modes"]) {
            if (!m.is_string()) bad_key("modes", "expected strings");
            try {
                spec.modes.push_back(run_mode_from_string(m.get<std::string>()));
            } catch (const std::invalid_argument& e) {
                bad_key("modes", e.what());
            }
        }
        if (spec.modes.empty()) bad_key("modes", "must be non-empty");
    }

    cfg.N = get_uint(doc, "N", cfg.N);
    cfg.p0 = get_number(doc, "p0", cfg.p0);
    if (!(cfg.p0 > 0.0 && cfg.p0 < 1.0)) bad_key("p0", "must lie in (0,1)");
    cfg.seed = get_uint(doc, "seed", cfg.seed);
    spec.n_runs = get_uint(doc, "n_runs", spec.n_runs);
    if (spec.n_runs < 1) bad_key("n_runs", "must be >= 1");

    if (doc.contains("seeds")) {
        if (!doc["seeds"].is_array()) bad_key("seeds", "expected an array");
        for (const auto& s : doc["seeds"]) {
            if (!s.is_number_unsigned()) bad_key("seeds", "expected integers");
            spec.seeds.push_back(s.get<std::uint64_t>());
        }
        if (spec.seeds.empty()) bad_key("seeds", "must be non-empty");
        spec.n_runs = spec.seeds.size();
    }

    if (doc.contains("sweep")) {
        const json& sw = doc["sweep"];
        if (!sw.is_object()) bad_key("sweep", "expected an object");
        expect_keys(sw, "sweep", {"p0", "N"});
        if (sw.contains("p0")) {
            if (!sw["p0"].is_array() || sw["p0"].empty())
                bad_key("sweep.p0", "expected a non-empty array");
            for (const auto& p : sw["p0"]) {
                if (!p.is_number()) bad_key("sweep.p0", "expected numbers");
                spec.p0_sweep.push_back(p.get<double>());
            }
        }
        if (sw.contains("N")) {
            if (!sw["N"].is_array() || sw["N"].empty())
                bad_key("sweep.N", "expected a non-empty array");
            for (const auto& n : sw["N"]) {
                if (!n.is_number_unsigned()) bad_key("sweep.N", "expected integers");
                spec.N_sweep.push_back(n.get<std::size_t>());
            }
        }
    }

    if (doc.contains("ref_pf")) spec.ref_pf = get_number(doc, "ref_pf", 0.0);
    if (doc.contains("out")) {
        if (!doc["out"].is_string()) bad_key("out", "expected a string");
        spec.out_dir = doc["out"].get<std::string>();
    }
    spec.threads = get_uint(doc, "threads", spec.threads);

    if (doc.contains("N0")) cfg.N0_override = get_uint(doc, "N0", 0);
    if (doc.contains("high_dim")) {
        if (!doc["high_dim"].is_boolean()) bad_key("high_dim", "expected a boolean");
        cfg.high_dim_override = doc["high_dim"].get<bool>();
    }
    cfg.max_levels = get_uint(doc, "max_levels", cfg.max_levels);
    cfg.lambda0 = get_number(doc, "lambda0", cfg.lambda0);
    cfg.adapt_window = get_uint(doc, "adapt_window", cfg.adapt_window);
    cfg.warm_fraction = get_number(doc, "warm_fraction", cfg.warm_fraction);
    cfg.policy.gamma_T = get_number(doc, "gamma_T", cfg.policy.gamma_T);

    if (doc.contains("policy")) {
        const json& p = doc["policy"];
        if (!p.is_object()) bad_key("policy", "expected an object");
        expect_keys(p, "policy",
                    {"gamma_T", "beta0", "beta1", "beta2",
                     "max_refines_per_step", "pool_size"});
        cfg.policy.gamma_T = get_number(p, "gamma_T", cfg.policy.gamma_T);
        cfg.policy.beta0 = get_number(p, "beta0", cfg.policy.beta0);
        cfg.policy.beta1 = get_number(p, "beta1", cfg.policy.beta1);
        cfg.policy.beta2 = get_number(p, "beta2", cfg.policy.beta2);
        cfg.policy.max_refines_per_step =
            get_uint(p, "max_refines_per_step", cfg.policy.max_refines_per_step);
        cfg.policy.pool_size = get_uint(p, "pool_size", cfg.policy.pool_size);
    }
    if (doc.contains("correction")) {
        const json& c = doc["correction"];
        if (!c.is_object()) bad_key("correction", "expected an object");
        expect_keys(c, "correction",
                    {"delta_N", "eps_abs", "eps_threshold_rel",
                     "eps_probability_rel"});
        cfg.correction.delta_N = get_uint(c, "delta_N", cfg.correction.delta_N);
        if (cfg.correction.delta_N < 1)
            bad_key("correction.delta_N", "must be >= 1");
        if (c.contains("eps_abs"))
            cfg.correction.eps_abs = get_number(c, "eps_abs", 0.0);
        cfg.correction.eps_threshold_rel =
            get_number(c, "eps_threshold_rel", cfg.correction.eps_threshold_rel);
        cfg.correction.eps_probability_rel = get_number(
            c, "eps_probability_rel", cfg.correction.eps_probability_rel);
    }
    if (doc.contains("gp")) {
        const json& g = doc["gp"];
        if (!g.is_object()) bad_key("gp", "expected an object");
        expect_keys(g, "gp",
                    {"mle_starts", "mle_budget", "nugget_rel", "nugget_max"});
        cfg.gp.mle_starts = get_uint(g, "mle_starts", cfg.gp.mle_starts);
        cfg.gp.mle_budget = get_uint(g, "mle_budget", cfg.gp.mle_budget);
        cfg.gp.nugget_rel = get_number(g, "nugget_rel", cfg.gp.nugget_rel);
        cfg.gp.nugget_max = get_number(g, "nugget_max", cfg.gp.nugget_max);
    }
    if (doc.contains("pls")) {
        const json& p = doc["pls"];
        if (!p.is_object()) bad_key("pls", "expected an object");
        expect_keys(p, "pls", {"eps_y_rel", "r_max_cap"});
        cfg.pls.eps_y_rel = get_number(p, "eps_y_rel", cfg.pls.eps_y_rel);
        cfg.pls.r_max_cap =
            static_cast<long>(get_uint(p, "r_max_cap",
                                       static_cast<std::size_t>(cfg.pls.r_max_cap)));
    }

    spec.validate();
    return spec;
}

ExperimentSpec parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::invalid_argument("config: cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string cell_name(const std::string& benchmark, RunMode mode, double p0,
                      std::size_t N) {
    return benchmark + "-" + to_string(mode) + "-p" + fmt_g(p0) + "-N" +
           std::to_string(N);
}

namespace {

json config_json(const RunConfig& cfg) {
    json j;
    j["benchmark"] = cfg.benchmark;
    j["d"] = cfg.bench.d;
    j["kappa"] = cfg.bench.kappa;
    j["tau"] = cfg.bench.tau;
    j["nu"] = cfg.bench.nu;
    j["threshold_shift"] = cfg.bench.threshold_shift;
    if (cfg.benchmark == "oscillator-pca") {
        j["pca_realizations"] = cfg.bench.pca_realizations;
        j["pca_seed"] = cfg.bench.pca_seed;
    }
    j["mode"] = to_string(cfg.mode);
    j["N"] = cfg.N;
    j["p0"] = cfg.p0;
    j["seed"] = cfg.seed;
    if (cfg.N0_override) j["N0"] = *cfg.N0_override;
    if (cfg.high_dim_override) j["high_dim"] = *cfg.high_dim_override;
    j["max_levels"] = cfg.max_levels;
    j["lambda0"] = cfg.lambda0;
    j["adapt_window"] = cfg.adapt_window;
    j["warm_fraction"] = cfg.warm_fraction;
    j["policy"] = {{"gamma_T", cfg.policy.gamma_T},
                   {"beta0", cfg.policy.beta0},
                   {"beta1", cfg.policy.beta1},
                   {"beta2", cfg.policy.beta2},
                   {"max_refines_per_step", cfg.policy.max_refines_per_step},
                   {"pool_size", cfg.policy.pool_size}};
    j["correction"] = {{"delta_N", cfg.correction.delta_N},
                       {"eps_threshold_rel", cfg.correction.eps_threshold_rel},
                       {"eps_probability_rel", cfg.correction.eps_probability_rel}};
    if (cfg.correction.eps_abs) j["correction"]["eps_abs"] = *cfg.correction.eps_abs;
    j["gp"] = {{"mle_starts", cfg.gp.mle_starts},
               {"mle_budget", cfg.gp.mle_budget},
               {"nugget_rel", cfg.gp.nugget_rel},
               {"nugget_max", cfg.gp.nugget_max}};
    j["pls"] = {{"eps_y_rel", cfg.pls.eps_y_rel},
                {"r_max_cap", cfg.pls.r_max_cap}};
    return j;
}

RunConfig cell_config(const ExperimentSpec& spec, RunMode mode, double p0,
                      std::size_t N, std::uint64_t seed) {
    RunConfig cfg = spec.base;
    cfg.mode = mode;
    cfg.p0 = p0;
    cfg.N = N;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

std::string run_record_json(const RunRecord& rec, const ExperimentSpec& spec) {
    RunConfig cfg = cell_config(spec, rec.mode, rec.p0, rec.N, rec.seed);
    json j;
    j["version"] = kVersion;
    j["cell"] = rec.cell;
    j["config"] = config_json(cfg);
    if (rec.ref_pf) j["ref_pf"] = *rec.ref_pf;
    j["ok"] = rec.ok;
    if (!rec.ok) {
        j["error"] = rec.error;
    } else {
        const RunResult& r = rec.result;
        json levels = json::array();
        for (const auto& lv : r.levels) {
            levels.push_back({{"j", lv.j},
                              {"c_j", lv.c_j},
                              {"p_j", lv.p_j},
                              {"accept_rate", lv.accept_rate},
                              {"gamma_j", lv.gamma_j},
                              {"delta_j", lv.delta_j},
                              {"true_evals", lv.true_evals},
                              {"surrogate_evals", lv.surrogate_evals},
                              {"refine_evals", lv.refine_evals},
                              {"fix_evals", lv.fix_evals}});
        }
        j["result"] = {{"p_f", r.p_f},
                       {"p_final", r.p_final},
                       {"levels_count", r.levels_count},
                       {"n_total", r.n_total},
                       {"n0_evals", r.n0_evals},
                       {"cov_independent", r.cov_independent},
                       {"cov_correlated", r.cov_correlated},
                       {"levels", levels}};
    }
    return j.dump(2) + "\n";
}

std::vector<CellAggregate> aggregate(const std::vector<RunRecord>& runs) {
    std::map<std::string, CellAggregate> cells;
    std::map<std::string, std::vector<double>> pf_samples;
    std::map<std::string, std::optional<double>> refs;

    for (const auto& rec : runs) {
        auto& cell = cells[rec.cell];
        if (cell.n_runs == 0) {
            cell.cell = rec.cell;
            cell.mode = rec.mode;
            cell.p0 = rec.p0;
            cell.N = rec.N;
        }
        ++cell.n_runs;
        refs[rec.cell] = rec.ref_pf;
        if (!rec.ok) {
            ++cell.n_failed;
            continue;
        }
        const RunResult& r = rec.result;
        pf_samples[rec.cell].push_back(r.p_f);
        cell.mean_n0 += static_cast<double>(r.n0_evals);
        cell.mean_nhat_total += static_cast<double>(r.n_total);
        cell.mean_n_total += static_cast<double>(
            total_evaluations(rec.N, rec.p0, r.levels_count));
    }

    std::vector<CellAggregate> out;
    for (auto& [name, cell] : cells) {
        const auto& pf = pf_samples[name];
        const double n = static_cast<double>(pf.size());
        if (!pf.empty()) {
            for (double v : pf) cell.mean_pf += v;
            cell.mean_pf /= n;
            if (pf.size() > 1) {
                double ss = 0.0;
                for (double v : pf) ss += (v - cell.mean_pf) * (v - cell.mean_pf);
                cell.std_pf = std::sqrt(ss / (n - 1.0));
            }
            cell.mean_n0 /= n;
            cell.mean_nhat_total /= n;
            cell.mean_n_total /= n;
            if (refs[name] && *refs[name] > 0.0)
                cell.eps = std::abs(cell.mean_pf - *refs[name]) / *refs[name];
        }
        out.push_back(cell);
    }

    // eps0: pair each cell with the standard-mode cell sharing (p0, N)
    for (auto& cell : out) {
        if (cell.mode == RunMode::Standard) continue;
        for (const auto& other : out) {
            if (other.mode != RunMode::Standard) continue;
            if (other.p0 != cell.p0 || other.N != cell.N) continue;
            if (other.n_runs == other.n_failed || other.mean_pf <= 0.0) continue;
            cell.eps0 = std::abs(cell.mean_pf - other.mean_pf) / other.mean_pf;
            break;
        }
    }

    std::sort(out.begin(), out.end(), [](const CellAggregate& a,
                                         const CellAggregate& b) {
        return a.cell < b.cell;
    });
    return out;
}

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
    std::string quoted = "\"";
    for (char c : value) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

namespace {

std::string csv_row(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) line += ',';
        line += csv_field(fields[i]);
    }
    line += "\r\n";
    return line;
}

std::string opt_str(const std::optional<double>& v) {
    return v ? fmt_num(*v) : std::string();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec) {
    spec.validate();

    const auto seeds = spec.run_seeds();
    const auto modes = spec.run_modes();
    const auto p0s =
        spec.p0_sweep.empty() ? std::vector<double>{spec.base.p0} : spec.p0_sweep;
    const auto Ns = spec.N_sweep.empty() ? std::vector<std::size_t>{spec.base.N}
                                         : spec.N_sweep;

    ExperimentReport report;
    for (RunMode mode : modes)
        for (double p0 : p0s)
            for (std::size_t N : Ns)
                for (std::uint64_t seed : seeds) {
                    RunRecord rec;
                    rec.mode = mode;
                    rec.p0 = p0;
                    rec.N = N;
                    rec.seed = seed;
                    rec.benchmark = spec.base.benchmark;
                    rec.d = spec.base.bench.d;
                    rec.cell = cell_name(spec.base.benchmark, mode, p0, N);
                    rec.ref_pf = spec.ref_pf;
                    report.runs.push_back(std::move(rec));
                }
    report.total_runs = report.runs.size();

    std::size_t workers = spec.threads ? spec.threads
                                       : std::thread::hardware_concurrency();
    workers = std::max<std::size_t>(1, std::min(workers, report.runs.size()));

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= report.runs.size()) break;
            RunRecord& rec = report.runs[i];
            RunConfig cfg = cell_config(spec, rec.mode, rec.p0, rec.N, rec.seed);
            try {
                rec.result = run(cfg);
                rec.ok = true;
            } catch (const std::exception& e) {
                rec.ok = false;
                rec.error = e.what();
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (const auto& rec : report.runs)
        if (!rec.ok) ++report.failed_runs;
    report.cells = aggregate(report.runs);

    // result files
    const fs::path root(spec.out_dir);
    fs::create_directories(root / "runs");
    for (const auto& rec : report.runs) {
        const fs::path dir = root / "runs" / rec.cell;
        fs::create_directories(dir);
        write_text(dir / (std::to_string(rec.seed) + ".json"),
                   run_record_json(rec, spec));
    }

    std::string agg =
        csv_row({"case", "mode", "p0", "N", "n_runs", "n_failed", "ref_pf",
                 "mean_pf", "std_pf", "eps", "eps0", "mean_n0",
                 "mean_nhat_total", "mean_n_total"});
    const std::string case_label =
        spec.base.benchmark + " d=" + std::to_string(spec.base.bench.d);
    for (const auto& cell : report.cells) {
        agg += csv_row({case_label, to_string(cell.mode), fmt_g(cell.p0),
                        std::to_string(cell.N), std::to_string(cell.n_runs),
                        std::to_string(cell.n_failed),
                        spec.ref_pf ? fmt_num(*spec.ref_pf) : std::string(),
                        fmt_num(cell.mean_pf), fmt_num(cell.std_pf),
                        opt_str(cell.eps), opt_str(cell.eps0),
                        fmt_num(cell.mean_n0), fmt_num(cell.mean_nhat_total),
                        fmt_num(cell.mean_n_total)});
    }
    write_text(root / "aggregate.csv", agg);

    std::string plot = csv_row({"mode", "p0", "N", "mean_evals", "rel_error"});
    for (const auto& cell : report.cells) {
        std::optional<double> rel = cell.eps ? cell.eps : cell.eps0;
        plot += csv_row({to_string(cell.mode), fmt_g(cell.p0),
                         std::to_string(cell.N), fmt_num(cell.mean_nhat_total),
                         opt_str(rel)});
    }
    write_text(root / "plotdata.csv", plot);

    return report;
}

// -- report -----------------------------------------------------------------

namespace {

struct LoadedRun {
    RunRecord rec;
    bool valid = false;
};

LoadedRun load_run(const fs::path& file) {
    LoadedRun out;
    std::ifstream in(file, std::ios::binary);
    if (!in) return out;
    json j;
    try {
        in >> j;
        const json& cfg = j.at("config");
        out.rec.benchmark = cfg.at("benchmark").get<std::string>();
        out.rec.d = cfg.at("d").get<std::size_t>();
        out.rec.mode = run_mode_from_string(cfg.at("mode").get<std::string>());
        out.rec.p0 = cfg.at("p0").get<double>();
        out.rec.N = cfg.at("N").get<std::size_t>();
        out.rec.seed = cfg.at("seed").get<std::uint64_t>();
        out.rec.cell = j.at("cell").get<std::string>();
        if (j.contains("ref_pf")) out.rec.ref_pf = j["ref_pf"].get<double>();
        out.rec.ok = j.at("ok").get<bool>();
        if (out.rec.ok) {
            const json& r = j.at("result");
            out.rec.result.p_f = r.at("p_f").get<double>();
            out.rec.result.p_final = r.at("p_final").get<double>();
            out.rec.result.levels_count = r.at("levels_count").get<std::size_t>();
            out.rec.result.n_total = r.at("n_total").get<std::size_t>();
            out.rec.result.n0_evals = r.at("n0_evals").get<std::size_t>();
        } else if (j.contains("error")) {
            out.rec.error = j["error"].get<std::string>();
        }
        out.valid = true;
    } catch (const std::exception&) {
        out.valid = false;
    }
    return out;
}

std::string col(const std::string& s, std::size_t w) {
    std::string out = s;
    if (out.size() < w) out.append(w - out.size(), ' ');
    return out + "  ";
}

std::string opt_cell(const std::optional<double>& v) {
    return v ? fmt_num(*v) : std::string("-");
}

}  // namespace

int report_directory(const std::string& dir, std::ostream& out) {
    fs::path root(dir);
    if (fs::exists(root / "runs")) root /= "runs";
    std::vector<RunRecord> runs;
    std::size_t unreadable = 0;
    if (fs::exists(root)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::recursive_directory_iterator(root))
            if (entry.is_regular_file() && entry.path().extension() == ".json")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            LoadedRun lr = load_run(f);
            if (lr.valid)
                runs.push_back(std::move(lr.rec));
            else
                ++unreadable;
        }
    }
    if (runs.empty()) {
        out << "no results in " << dir << "\n";
        return 1;
    }
    if (unreadable)
        out << "warning: " << unreadable << " unreadable result file(s) skipped\n";

    // group by benchmark/dimension
    std::map<std::pair<std::string, std::size_t>, std::vector<RunRecord>> groups;
    for (auto& rec : runs) groups[{rec.benchmark, rec.d}].push_back(std::move(rec));

    for (auto& [key, group] : groups) {
        out << "## " << key.first << " (d=" << key.second << ")\n";
        auto cells = aggregate(group);

        std::map<std::pair<double, std::size_t>, const CellAggregate*> standard;
        for (const auto& c : cells)
            if (c.mode == RunMode::Standard) standard[{c.p0, c.N}] = &c;

        out << col("case", 26) << col("E[Pf_MC]", 10) << col("E[Pf_SuS]", 10)
            << col("E[Pf_Local]", 11) << col("std[Pf_Local]", 13)
            << col("eps", 9) << col("eps0", 9) << col("E[N0]", 8)
            << col("E[Nhat_Total]", 13) << col("E[N_Total]", 10) << "\n";

        auto ref_of = [&](const std::string& cell_id) -> std::optional<double> {
            for (const auto& rec : group)
                if (rec.cell == cell_id) return rec.ref_pf;
            return std::nullopt;
        };

        for (const auto& c : cells) {
            const auto* std_cell = standard.count({c.p0, c.N})
                                       ? standard[{c.p0, c.N}]
                                       : nullptr;
            const bool is_standard = c.mode == RunMode::Standard;
            if (is_standard && standard.size() < cells.size()) {
                // standard shown as the SuS column of its paired local rows
                bool paired = false;
                for (const auto& other : cells)
                    if (other.mode != RunMode::Standard && other.p0 == c.p0 &&
                        other.N == c.N)
                        paired = true;
                if (paired) continue;
            }
            const std::string label = key.first + " p0=" + fmt_g(c.p0) +
                                      " N=" + std::to_string(c.N) +
                                      (is_standard ? "" : " [" + to_string(c.mode) + "]");
            const auto ref = ref_of(c.cell);
            out << col(label, 26) << col(opt_cell(ref), 10)
                << col(std_cell ? fmt_num(std_cell->mean_pf)
                                : (is_standard ? fmt_num(c.mean_pf) : "-"),
                       10)
                << col(is_standard ? "-" : fmt_num(c.mean_pf), 11)
                << col(is_standard ? "-" : fmt_num(c.std_pf), 13)
                << col(opt_cell(c.eps), 9) << col(opt_cell(c.eps0), 9)
                << col(fmt_num(c.mean_n0), 8)
                << col(fmt_num(c.mean_nhat_total), 13)
                << col(fmt_num(c.mean_n_total), 10) << "\n";
            if (ref)
                out << "  accepts (eps <= 0.25): "
                    << (c.eps && *c.eps <= 0.25 ? "PASS" : "FAIL") << "\n";
        }
        if (key.first == "g2")
            out << "note: published reference statistics for g2 correspond to "
                   "N = 1000, which is the default used here.\n";
        out << "\n";
    }
    return 0;
}

}  // namespace raresim
