#include "fjq/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fjq/block_analysis.hpp"
#include "fjq/simulator.hpp"
#include "fjq/stats.hpp"

namespace fjq {

using nlohmann::json;

RedundancyParams redundancy_params(double payload, int k, int n, double tau,
                                   const std::vector<double>& mu_base) {
    if (!(payload > 0.0)) throw ScenarioError("redundancy: payload must be > 0");
    if (k < 1 || k > n) throw ScenarioError("redundancy: need 1 <= K <= N");
    if (mu_base.size() != static_cast<size_t>(n))
        throw ScenarioError("redundancy: mu vector length mismatch");
    RedundancyParams rp;
    rp.service_rates.reserve(mu_base.size());
    double mu_min = mu_base.front();
    for (double mu : mu_base) {
        rp.service_rates.push_back(static_cast<double>(k) * mu / payload);
        mu_min = std::min(mu_min, mu);
    }
    rp.offered_traffic = payload / (static_cast<double>(n) * tau * mu_min);
    return rp;
}

double aligned_grid_step(double tau, std::optional<double> hint) {
    if (!hint) return tau / 400.0;
    const double div = std::max(1.0, std::round(tau / *hint));
    return tau / div;
}

std::uint64_t point_seed(std::uint64_t base, int point_id) {
    std::uint64_t s = base;
    std::uint64_t v = 0;
    for (int i = 0; i <= point_id; ++i) v = splitmix64(s);
    return v;
}

namespace {

Engine parse_engine(const std::string& s) {
    if (s == "analytic") return Engine::Analytic;
    if (s == "sim" || s == "simulate") return Engine::Simulate;
    if (s == "both") return Engine::Both;
    throw ScenarioError("unknown engine: " + s);
}

const char* engine_name(Engine e) {
    switch (e) {
        case Engine::Analytic: return "analytic";
        case Engine::Simulate: return "sim";
        default: return "both";
    }
}

std::vector<double> number_or_array(const json& v, int n, const char* what) {
    std::vector<double> out;
    if (v.is_number()) {
        out.assign(static_cast<size_t>(n), v.get<double>());
    } else if (v.is_array()) {
        for (const auto& x : v) out.push_back(x.get<double>());
        if (out.size() != static_cast<size_t>(n))
            throw ScenarioError(std::string(what) + ": expected scalar or length-N array");
    } else {
        throw ScenarioError(std::string(what) + ": expected number or array");
    }
    return out;
}

std::optional<int> parse_cap(const json& v) {
    if (v.is_string()) {
        if (v.get<std::string>() == "inf") return std::nullopt;
        throw ScenarioError("L: expected integer or \"inf\"");
    }
    if (!v.is_number_integer()) throw ScenarioError("L: expected integer or \"inf\"");
    return v.get<int>();
}

struct RawPoint {
    int k = 0;
    int n = 0;
    std::optional<int> cap;
    double tau = 0.0;
    json mu;
    json eps;
    std::optional<double> payload;
};

SystemConfig make_config(const RawPoint& rp, std::optional<double>* g_out) {
    SystemConfig cfg;
    cfg.n_paths = rp.n;
    cfg.k_data = rp.k;
    cfg.queue_cap = rp.cap;
    cfg.inter_arrival = rp.tau;
    cfg.service_rates = number_or_array(rp.mu, rp.n, "mu");
    cfg.erasure_probs = number_or_array(rp.eps, rp.n, "eps");
    if (rp.payload) {
        RedundancyParams red = redundancy_params(*rp.payload, rp.k, rp.n,
                                                 rp.tau, cfg.service_rates);
        cfg.service_rates = std::move(red.service_rates);
        *g_out = red.offered_traffic;
    }
    try {
        validate_config(cfg);
    } catch (const ConfigError& e) {
        throw ScenarioError(std::string("invalid point: ") + e.what());
    }
    return cfg;
}

void parse_code(const json& v, int* k, int* n) {
    if (!v.is_array() || v.size() != 2)
        throw ScenarioError("code: expected [K, N]");
    *k = v[0].get<int>();
    *n = v[1].get<int>();
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("scenario is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ScenarioError("scenario must be a JSON object");

    Scenario s;
    s.name = j.value("name", "scenario");
    if (j.contains("engine")) s.engine = parse_engine(j["engine"].get<std::string>());
    s.n_blocks = j.value("n_blocks", s.n_blocks);
    s.warmup_blocks = j.value("warmup_blocks", s.warmup_blocks);
    s.seed = j.value("seed", s.seed);
    if (j.contains("grid_step")) s.grid_step = j["grid_step"].get<double>();
    s.compute_paoi = j.value("paoi", true);
    s.record_traces = j.value("record_traces", false);
    if (j.contains("percentiles"))
        s.percentile_levels = j["percentiles"].get<std::vector<double>>();
    s.analytic_cell_cap = j.value("analytic_cell_cap", s.analytic_cell_cap);
    if (s.n_blocks <= s.warmup_blocks)
        throw ScenarioError("n_blocks must exceed warmup_blocks");

    std::vector<RawPoint> raw;
    if (j.contains("points")) {
        if (j.contains("grid"))
            throw ScenarioError("give either points or grid, not both");
        for (const auto& p : j["points"]) {
            RawPoint rp;
            parse_code(p.at("code"), &rp.k, &rp.n);
            rp.cap = parse_cap(p.at("L"));
            rp.tau = p.at("tau").get<double>();
            rp.mu = p.at("mu");
            rp.eps = p.at("eps");
            if (p.contains("payload")) rp.payload = p["payload"].get<double>();
            raw.push_back(std::move(rp));
        }
    } else if (j.contains("grid")) {
        const json& g = j["grid"];
        std::vector<std::pair<int, int>> codes;
        if (g.contains("code")) {
            for (const auto& c : g["code"]) {
                int k = 0, n = 0;
                parse_code(c, &k, &n);
                codes.emplace_back(k, n);
            }
        } else if (g.contains("K") && g.contains("N")) {
            const int n = g["N"].get<int>();
            for (const auto& k : g["K"]) codes.emplace_back(k.get<int>(), n);
        } else {
            throw ScenarioError("grid: need code list or K + N");
        }
        std::vector<std::optional<int>> caps;
        for (const auto& c : g.at("L")) caps.push_back(parse_cap(c));

        std::vector<double> taus;
        if (j.contains("sweep")) {
            const json& sw = j["sweep"];
            if (sw.value("param", "tau") != std::string("tau"))
                throw ScenarioError("sweep: only tau sweeps are supported");
            const double from = sw.at("from").get<double>();
            const double to = sw.at("to").get<double>();
            const double step = sw.at("step").get<double>();
            if (!(from > 0.0) || !(step > 0.0) || to < from)
                throw ScenarioError("sweep: need 0 < from <= to, step > 0");
            for (double t = from; t <= to + 0.5 * step; t += step)
                taus.push_back(t);
        } else {
            const json& tv = g.at("tau");
            if (tv.is_number())
                taus.push_back(tv.get<double>());
            else
                taus = tv.get<std::vector<double>>();
        }

        std::vector<double> epss;
        if (g.at("eps").is_number())
            epss.push_back(g["eps"].get<double>());
        else
            for (const auto& e : g["eps"])
                if (e.is_number()) epss.push_back(e.get<double>());

        std::vector<std::optional<double>> payloads{std::nullopt};
        if (g.contains("payload")) {
            payloads.clear();
            if (g["payload"].is_number())
                payloads.push_back(g["payload"].get<double>());
            else
                for (const auto& m : g["payload"]) payloads.push_back(m.get<double>());
        }

        for (const auto& [k, n] : codes)
            for (const auto& cap : caps)
                for (double tau : taus)
                    for (double eps : epss)
                        for (const auto& payload : payloads) {
                            RawPoint rp;
                            rp.k = k;
                            rp.n = n;
                            rp.cap = cap;
                            rp.tau = tau;
                            rp.mu = g.contains("mu") ? g["mu"] : json(1.0);
                            rp.eps = json(eps);
                            rp.payload = payload;
                            raw.push_back(std::move(rp));
                        }
    } else {
        throw ScenarioError("scenario needs points or grid");
    }
    if (raw.empty()) throw ScenarioError("scenario has no grid points");

    int id = 0;
    for (const auto& rp : raw) {
        GridPoint gp;
        gp.id = id;
        gp.cfg = make_config(rp, &gp.offered_traffic);
        gp.seed = point_seed(s.seed, id);
        s.points.push_back(std::move(gp));
        ++id;
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

// ---------------------------------------------------------------------------
// runner

namespace {

std::string fmt(double v) {
    if (v != v) return "NA";
    if (v == std::numeric_limits<double>::infinity()) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string join_or_scalar(const std::vector<double>& v) {
    bool uniform = true;
    for (double x : v)
        if (x != v.front()) uniform = false;
    if (uniform) return fmt(v.front());
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ';';
        s += fmt(v[i]);
    }
    return s;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct PointResult {
    std::string status = "ok";
    bool stable = true;
    double ps_analytic = kNaN;
    double ps_sim = kNaN;
    double ks_latency = kNaN;
    double ks_paoi = kNaN;
    std::vector<double> pct_analytic;  // PAoI percentiles per level
    std::vector<double> pct_sim;
    // CDF curves sampled at shared grid nodes
    std::vector<double> grid_t;
    std::vector<double> lat_analytic;
    std::vector<double> lat_sim;
    std::vector<double> paoi_t;
    std::vector<double> paoi_analytic;
    std::vector<double> paoi_sim;
    std::string trace_csv;  // filled when traces requested
    double grid_step = 0.0;
};

void append_status(std::string* status, const std::string& tag) {
    if (*status == "ok")
        *status = tag;
    else
        *status += ";" + tag;
}

PointResult run_point(const Scenario& sc, const GridPoint& gp, Engine engine,
                      std::int64_t n_blocks, std::optional<double> step_hint) {
    PointResult pr;
    const SystemConfig& cfg = gp.cfg;
    const double h = aligned_grid_step(cfg.inter_arrival, step_hint);
    pr.grid_step = h;
    pr.pct_analytic.assign(sc.percentile_levels.size(), kNaN);
    pr.pct_sim.assign(sc.percentile_levels.size(), kNaN);

    const bool unstable = cfg.unbounded() && !stable_unbounded(cfg);
    pr.stable = !unstable;

    const bool analytic_paoi_exists =
        cfg.unbounded() || cfg.cap() == 1;  // finite cap >= 2 is sim-only

    bool want_analytic = engine != Engine::Simulate;
    bool want_sim = engine != Engine::Analytic;

    if (want_analytic && unstable) {
        append_status(&pr.status, "unstable-analytic-skipped");
        want_analytic = false;
        if (!want_sim) {
            append_status(&pr.status, "sim-fallback");
            want_sim = true;
        }
    }

    BlockAnalysis ba;
    bool have_analytic = false;
    if (want_analytic) {
        const double horizon = cfg.unbounded()
                                   ? infinite_horizon(cfg)
                                   : (cfg.cap() + 1) * cfg.inter_arrival;
        if (horizon / h > static_cast<double>(sc.analytic_cell_cap)) {
            append_status(&pr.status, "analytic-infeasible");
            if (!want_sim) {
                append_status(&pr.status, "sim-fallback");
                want_sim = true;
            }
        } else {
            ba = block_latency(cfg, h);
            have_analytic = true;
            pr.ps_analytic = ba.success_prob;
            if (sc.compute_paoi) {
                if (analytic_paoi_exists) {
                    for (size_t i = 0; i < sc.percentile_levels.size(); ++i)
                        pr.pct_analytic[i] =
                            percentile(ba.paoi, sc.percentile_levels[i]);
                } else {
                    append_status(&pr.status, "paoi-analytic-unavailable");
                    if (!want_sim) {
                        append_status(&pr.status, "paoi-sim-fallback");
                        want_sim = true;
                    }
                }
            }
        }
    }

    std::optional<SimResult> sim;
    if (want_sim) {
        if (unstable) append_status(&pr.status, "nonstationary");
        SimParams params;
        params.n_blocks = n_blocks;
        params.warmup_blocks = sc.warmup_blocks;
        params.rng_seed = gp.seed;
        params.record_traces = sc.record_traces;
        sim = simulate_system(cfg, params);
        const auto counted = static_cast<double>(n_blocks - sc.warmup_blocks);
        pr.ps_sim = static_cast<double>(sim->delivered_blocks()) / counted;
    }

    // latency CDF curves on the analytic grid (or a default horizon for
    // sim-only runs)
    std::size_t cells;
    if (have_analytic) {
        cells = ba.latency.cells();
    } else {
        const double horizon =
            cfg.unbounded() ? 40.0 * cfg.inter_arrival
                            : (cfg.cap() + 1) * cfg.inter_arrival;
        cells = static_cast<std::size_t>(std::llround(horizon / h));
    }
    std::optional<EmpiricalCdf> lat_emp;
    if (sim) lat_emp.emplace(sim->latency_samples());
    pr.grid_t.resize(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        const double t = h * static_cast<double>(i + 1);
        pr.grid_t[i] = t;
        if (have_analytic) pr.lat_analytic.push_back(ba.latency.cdf_at(t));
        if (lat_emp) pr.lat_sim.push_back((*lat_emp)(t));
    }
    if (have_analytic && lat_emp)
        pr.ks_latency = ks_distance(*lat_emp, ba.latency);

    if (sc.compute_paoi) {
        std::optional<EmpiricalCdf> paoi_emp;
        if (sim && !sim->aoi().paoi.empty()) paoi_emp.emplace(sim->aoi().paoi);
        if (paoi_emp) {
            for (size_t i = 0; i < sc.percentile_levels.size(); ++i)
                pr.pct_sim[i] = paoi_emp->percentile(sc.percentile_levels[i]);
        }
        const bool have_paoi_analytic = have_analytic && analytic_paoi_exists &&
                                        ba.paoi.cells() > 0;
        std::size_t pcells = 0;
        if (have_paoi_analytic) pcells = ba.paoi.cells();
        else if (paoi_emp && !paoi_emp->sorted().empty())
            pcells = static_cast<std::size_t>(
                std::llround(std::ceil(paoi_emp->sorted().back() / h)));
        for (std::size_t i = 0; i < pcells; ++i) {
            const double t = h * static_cast<double>(i + 1);
            pr.paoi_t.push_back(t);
            if (have_paoi_analytic) pr.paoi_analytic.push_back(ba.paoi.cdf_at(t));
            if (paoi_emp) pr.paoi_sim.push_back((*paoi_emp)(t));
        }
        if (have_paoi_analytic && paoi_emp)
            pr.ks_paoi = ks_distance(*paoi_emp, ba.paoi);
    }

    if (sc.record_traces && sim) {
        std::ostringstream os;
        os << "index,gen_time,decode_time,latency,paoi";
        for (int j = 0; j < cfg.n_paths; ++j) os << ",outcome_" << j;
        os << "\n";
        // paoi sample per block where one was recorded
        std::vector<double> paoi_by_block(
            static_cast<size_t>(sim->n_blocks()), kNaN);
        const auto& aoi = sim->aoi();
        for (size_t i = 0; i < aoi.block_index.size(); ++i)
            paoi_by_block[static_cast<size_t>(aoi.block_index[i])] = aoi.paoi[i];
        for (std::int64_t b = sc.warmup_blocks; b < sim->n_blocks(); ++b) {
            const BlockRecord rec = sim->record(b);
            os << b << ',' << fmt(rec.gen_time) << ',' << fmt(rec.decode_time)
               << ',' << fmt(rec.latency) << ','
               << fmt(paoi_by_block[static_cast<size_t>(b)]);
            for (const PathOutcome& o : rec.per_path) {
                switch (o.kind) {
                    case PathOutcomeKind::Delivered: os << ",D"; break;
                    case PathOutcomeKind::Dropped: os << ",X"; break;
                    case PathOutcomeKind::Erased: os << ",E"; break;
                }
            }
            os << "\n";
        }
        pr.trace_csv = os.str();
    }
    return pr;
}

std::string cap_label(const SystemConfig& cfg) {
    return cfg.unbounded() ? "inf" : std::to_string(cfg.cap());
}

}  // namespace

void run_scenario(const Scenario& scenario, const RunOptions& opt) {
    namespace fs = std::filesystem;
    const Engine engine = opt.engine.value_or(scenario.engine);
    const std::int64_t n_blocks = opt.blocks.value_or(scenario.n_blocks);
    if (n_blocks <= scenario.warmup_blocks)
        throw ScenarioError("n_blocks must exceed warmup_blocks");
    std::optional<double> step_hint =
        opt.grid_step ? opt.grid_step : scenario.grid_step;

    Scenario sc = scenario;  // reseed if overridden
    if (opt.seed) {
        sc.seed = *opt.seed;
        for (auto& gp : sc.points) gp.seed = point_seed(sc.seed, gp.id);
    }

    fs::create_directories(opt.out_dir);
    if (sc.record_traces) fs::create_directories(fs::path(opt.out_dir) / "traces");

    const int n_points = static_cast<int>(sc.points.size());
    std::vector<PointResult> results(static_cast<size_t>(n_points));
    int jobs = opt.jobs > 0
                   ? opt.jobs
                   : static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::max(1, std::min(jobs, n_points));

    std::atomic<int> next{0};
    auto worker = [&]() {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= n_points) return;
            results[static_cast<size_t>(i)] =
                run_point(sc, sc.points[static_cast<size_t>(i)], engine,
                          n_blocks, step_hint);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    // summary.csv
    std::ofstream sum(fs::path(opt.out_dir) / "summary.csv");
    sum << "point_id,K,N,L,tau,mu,eps,G,engine,status,stable,n_blocks,seed,"
           "ps_analytic,ps_sim,ks_latency,ks_paoi";
    for (double lvl : sc.percentile_levels) {
        const int pc = static_cast<int>(std::lround(lvl * 100));
        sum << ",d" << pc << "_analytic";
    }
    for (double lvl : sc.percentile_levels) {
        const int pc = static_cast<int>(std::lround(lvl * 100));
        sum << ",d" << pc << "_sim";
    }
    sum << "\n";
    for (int i = 0; i < n_points; ++i) {
        const GridPoint& gp = sc.points[static_cast<size_t>(i)];
        const PointResult& pr = results[static_cast<size_t>(i)];
        sum << gp.id << ',' << gp.cfg.k_data << ',' << gp.cfg.n_paths << ','
            << cap_label(gp.cfg) << ',' << fmt(gp.cfg.inter_arrival) << ','
            << join_or_scalar(gp.cfg.service_rates) << ','
            << join_or_scalar(gp.cfg.erasure_probs) << ','
            << (gp.offered_traffic ? fmt(*gp.offered_traffic) : "NA") << ','
            << engine_name(engine) << ',' << pr.status << ','
            << (pr.stable ? 1 : 0) << ',' << n_blocks << ',' << gp.seed << ','
            << fmt(pr.ps_analytic) << ',' << fmt(pr.ps_sim) << ','
            << fmt(pr.ks_latency) << ',' << fmt(pr.ks_paoi);
        for (double v : pr.pct_analytic) sum << ',' << fmt(v);
        for (double v : pr.pct_sim) sum << ',' << fmt(v);
        sum << "\n";
    }
    sum.close();

    std::ofstream lat(fs::path(opt.out_dir) / "latency_cdf.csv");
    lat << "point_id,t,cdf_analytic,cdf_sim\n";
    for (int i = 0; i < n_points; ++i) {
        const PointResult& pr = results[static_cast<size_t>(i)];
        for (size_t r = 0; r < pr.grid_t.size(); ++r) {
            lat << i << ',' << fmt(pr.grid_t[r]) << ','
                << (r < pr.lat_analytic.size() ? fmt(pr.lat_analytic[r]) : "NA")
                << ','
                << (r < pr.lat_sim.size() ? fmt(pr.lat_sim[r]) : "NA") << "\n";
        }
    }
    lat.close();

    std::ofstream pao(fs::path(opt.out_dir) / "paoi_cdf.csv");
    pao << "point_id,t,cdf_analytic,cdf_sim\n";
    for (int i = 0; i < n_points; ++i) {
        const PointResult& pr = results[static_cast<size_t>(i)];
        for (size_t r = 0; r < pr.paoi_t.size(); ++r) {
            pao << i << ',' << fmt(pr.paoi_t[r]) << ','
                << (r < pr.paoi_analytic.size() ? fmt(pr.paoi_analytic[r])
                                                : "NA")
                << ','
                << (r < pr.paoi_sim.size() ? fmt(pr.paoi_sim[r]) : "NA")
                << "\n";
        }
    }
    pao.close();

    if (sc.record_traces) {
        for (int i = 0; i < n_points; ++i) {
            if (results[static_cast<size_t>(i)].trace_csv.empty()) continue;
            std::ofstream tf(fs::path(opt.out_dir) / "traces" /
                             ("point_" + std::to_string(i) + ".csv"));
            tf << results[static_cast<size_t>(i)].trace_csv;
        }
    }

    json manifest;
    manifest["scenario"] = sc.name;
    manifest["engine"] = engine_name(engine);
    manifest["n_blocks"] = n_blocks;
    manifest["warmup_blocks"] = sc.warmup_blocks;
    manifest["seed"] = sc.seed;
    manifest["percentiles"] = sc.percentile_levels;
    manifest["outputs"] = {"summary.csv", "latency_cdf.csv", "paoi_cdf.csv"};
    json pts = json::array();
    for (int i = 0; i < n_points; ++i) {
        const GridPoint& gp = sc.points[static_cast<size_t>(i)];
        const PointResult& pr = results[static_cast<size_t>(i)];
        json p;
        p["id"] = gp.id;
        p["K"] = gp.cfg.k_data;
        p["N"] = gp.cfg.n_paths;
        p["L"] = cap_label(gp.cfg);
        p["tau"] = gp.cfg.inter_arrival;
        p["mu"] = gp.cfg.service_rates;
        p["eps"] = gp.cfg.erasure_probs;
        if (gp.offered_traffic) p["G"] = *gp.offered_traffic;
        p["seed"] = gp.seed;
        p["grid_step"] = pr.grid_step;
        p["status"] = pr.status;
        p["stable"] = pr.stable;
        pts.push_back(std::move(p));
    }
    manifest["points"] = std::move(pts);
    std::ofstream mf(fs::path(opt.out_dir) / "manifest.json");
    mf << manifest.dump(2) << "\n";
}

}  // namespace fjq
