#include <atomic>
#include <algorithm>
#include <chrono>
#include <csignal>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "risktrace/bayes.hpp"
#include "risktrace/client.hpp"
#include "risktrace/csv.hpp"
#include "risktrace/errors.hpp"
#include "risktrace/grid_map.hpp"
#include "risktrace/manifest.hpp"
#include "risktrace/protocol.hpp"
#include "risktrace/server.hpp"
#include "risktrace/simulation.hpp"
#include "risktrace/stats.hpp"
#include "risktrace/tile.hpp"

namespace fs = std::filesystem;
using namespace risktrace;

namespace {

// All commands share the canonical grid: 1 m x 1 m x 1 s cells anchored at
// the coordinate origin.
const GridSpec kGrid{};

Trajectory load_trajectory(const fs::path& file) {
    const CsvTable table = read_csv(file);
    require_columns(table, {"t_seconds", "x_meters", "y_meters"});
    std::vector<PathSample> samples;
    samples.reserve(table.rows.size());
    for (const std::vector<std::string>& row : table.rows) {
        samples.push_back({std::stod(row[0]), std::stod(row[1]), std::stod(row[2])});
    }
    Trajectory trajectory = discretize(samples, kGrid);
    trajectory.person_id = file.stem().string();
    return trajectory;
}

std::vector<Trajectory> load_trajectories(const std::vector<std::string>& files) {
    std::vector<Trajectory> out;
    out.reserve(files.size());
    for (const std::string& file : files) {
        out.push_back(load_trajectory(file));
    }
    return out;
}

void ensure_out_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw Error("cannot create output directory " + dir.string());
    }
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
    std::size_t trials = 20000;
    std::uint64_t seed = 0;
    double sigma_t = 100.0;
    double sigma_xy = 1.0;
    double p0 = RiskParams::default_p0();
    double eps = 1e-12;
    std::string out;
};

void add_simulate(CLI::App& app, SimulateOptions& opt) {
    CLI::App* cmd = app.add_subcommand(
        "simulate", "Run the crossing-scenario experiment and write per-trial CSVs");
    cmd->add_option("--trials", opt.trials, "Number of walker trials")
        ->capture_default_str()
        ->envname("RISKTRACE_TRIALS");
    cmd->add_option("--seed", opt.seed, "Master RNG seed")
        ->capture_default_str()
        ->envname("RISKTRACE_SEED");
    cmd->add_option("--sigma-t", opt.sigma_t, "Temporal decay scale, seconds")
        ->capture_default_str()
        ->envname("RISKTRACE_SIGMA_T");
    cmd->add_option("--sigma-xy", opt.sigma_xy, "Spatial decay scale, meters")
        ->capture_default_str()
        ->envname("RISKTRACE_SIGMA_XY");
    cmd->add_option("--p0", opt.p0, "Peak per-second infection probability")
        ->capture_default_str()
        ->envname("RISKTRACE_P0");
    cmd->add_option("--eps", opt.eps, "Map truncation threshold")
        ->capture_default_str()
        ->envname("RISKTRACE_EPS");
    cmd->add_option("--out", opt.out, "Output directory")
        ->required()
        ->envname("RISKTRACE_OUT");
}

int run_simulate(const SimulateOptions& opt) {
    ScenarioConfig config;
    config.n_trials = opt.trials;
    config.rng_seed = opt.seed;
    config.map_truncation_eps = opt.eps;
    const RiskParams params =
        RiskParams::from_scales(opt.p0, opt.sigma_xy, opt.sigma_xy, opt.sigma_t);

    const std::vector<TrialRecord> records = run_experiment(config, params);

    ensure_out_dir(opt.out);
    std::string trials_csv =
        "trial_index,entry_side,entry_time,speed,risk_score,min_distance,infected\n";
    std::string scatter_csv = "risk_score,exp_neg_min_distance\n";
    for (const TrialRecord& rec : records) {
        trials_csv += csv_line({std::to_string(rec.trial_index),
                                to_string(rec.meta.entry_side),
                                format_double(rec.meta.entry_time),
                                format_double(rec.meta.speed),
                                format_double(rec.risk_score),
                                format_double(rec.min_distance),
                                rec.infected ? "1" : "0"});
        trials_csv += '\n';
        scatter_csv += csv_line({format_double(rec.risk_score),
                                 format_double(proximity_score(rec.min_distance))});
        scatter_csv += '\n';
    }
    const fs::path dir(opt.out);
    write_text_file(dir / "trials.csv", trials_csv);
    write_text_file(dir / "scatter.csv", scatter_csv);

    RunManifest manifest = RunManifest::for_command("simulate", opt.seed);
    manifest.config = {{"trials", opt.trials}, {"seed", opt.seed},
                       {"sigma_t", opt.sigma_t}, {"sigma_xy", opt.sigma_xy},
                       {"p0", opt.p0},           {"eps", opt.eps}};
    record_output(manifest, dir / "trials.csv");
    record_output(manifest, dir / "scatter.csv");
    write_manifest(dir, manifest);

    std::cout << "wrote " << records.size() << " trials to "
              << (dir / "trials.csv").string() << "\n";
    return 0;
}

// --------------------------------------------------------------------- roc

struct RocOptions {
    std::string trials_file;
    std::string metric = "both";
    std::string out;
};

void add_roc(CLI::App& app, RocOptions& opt) {
    CLI::App* cmd = app.add_subcommand(
        "roc", "Compute ROC staircases from a trials CSV");
    cmd->add_option("--trials-file", opt.trials_file, "trials.csv from `simulate`")
        ->required();
    cmd->add_option("--metric", opt.metric, "risk, proximity, or both")
        ->capture_default_str()
        ->check(CLI::IsMember({"risk", "proximity", "both"}));
    cmd->add_option("--out", opt.out, "Output directory")
        ->required()
        ->envname("RISKTRACE_OUT");
}

std::vector<TrialRecord> load_trials(const fs::path& file) {
    const CsvTable table = read_csv(file);
    require_columns(table, {"trial_index", "entry_side", "entry_time", "speed",
                            "risk_score", "min_distance", "infected"});
    std::vector<TrialRecord> records;
    records.reserve(table.rows.size());
    for (const std::vector<std::string>& row : table.rows) {
        TrialRecord rec;
        rec.trial_index = std::stoull(row[0]);
        rec.meta.entry_time = std::stod(row[2]);
        rec.meta.speed = std::stod(row[3]);
        rec.risk_score = std::stod(row[4]);
        rec.min_distance = std::stod(row[5]);
        rec.infected = row[6] == "1";
        records.push_back(rec);
    }
    return records;
}

std::string roc_csv(const RocCurve& curve) {
    std::string out = "threshold,fpr,tpr\n";
    for (const RocPoint& p : curve.points) {
        out += csv_line({format_double(p.threshold), format_double(p.fpr),
                         format_double(p.tpr)});
        out += '\n';
    }
    return out;
}

int run_roc(const RocOptions& opt) {
    const std::vector<TrialRecord> records = load_trials(opt.trials_file);
    ensure_out_dir(opt.out);
    const fs::path dir(opt.out);

    RunManifest manifest = RunManifest::for_command("roc", 0);
    manifest.config = {{"trials_file", opt.trials_file},
                       {"metric", opt.metric}};

    for (const auto& [name, kind] :
         {std::pair{std::string("risk"), ScoreKind::risk},
          std::pair{std::string("proximity"), ScoreKind::proximity}}) {
        if (opt.metric != "both" && opt.metric != name) continue;
        const RocCurve curve = roc(records, kind);
        const fs::path file = dir / ("roc_" + name + ".csv");
        write_text_file(file, roc_csv(curve));
        record_output(manifest, file);
        std::cout << "auc_" << name << "=" << format_double(roc_auc(curve)) << "\n";
    }
    write_manifest(dir, manifest);
    return 0;
}

// --------------------------------------------------------------- build-map

struct BuildMapOptions {
    std::vector<std::string> patient_files;
    double sigma_t = 100.0;
    double sigma_xy = 1.0;
    double p0 = RiskParams::default_p0();
    double eps = 1e-9;
    std::string out;
};

void add_build_map(CLI::App& app, BuildMapOptions& opt) {
    CLI::App* cmd = app.add_subcommand(
        "build-map", "Aggregate patient trajectories into a risk-map tile");
    cmd->add_option("patients", opt.patient_files,
                    "Patient trajectory CSVs (t_seconds,x_meters,y_meters)");
    cmd->add_option("--sigma-t", opt.sigma_t, "Temporal decay scale, seconds")
        ->capture_default_str()
        ->envname("RISKTRACE_SIGMA_T");
    cmd->add_option("--sigma-xy", opt.sigma_xy, "Spatial decay scale, meters")
        ->capture_default_str()
        ->envname("RISKTRACE_SIGMA_XY");
    cmd->add_option("--p0", opt.p0, "Peak per-second infection probability")
        ->capture_default_str()
        ->envname("RISKTRACE_P0");
    cmd->add_option("--eps", opt.eps, "Map truncation threshold")
        ->capture_default_str()
        ->envname("RISKTRACE_EPS");
    cmd->add_option("--out", opt.out, "Output directory")
        ->required()
        ->envname("RISKTRACE_OUT");
}

int run_build_map(const BuildMapOptions& opt) {
    const std::vector<Trajectory> patients = load_trajectories(opt.patient_files);
    const RiskParams params =
        RiskParams::from_scales(opt.p0, opt.sigma_xy, opt.sigma_xy, opt.sigma_t);
    const RiskMap map = build_risk_map(patients, params, kGrid, opt.eps);

    ensure_out_dir(opt.out);
    const fs::path dir(opt.out);
    write_tile_file(dir / "map.tile", map);

    RunManifest manifest = RunManifest::for_command("build-map", 0);
    manifest.config = {{"patients", opt.patient_files}, {"sigma_t", opt.sigma_t},
                       {"sigma_xy", opt.sigma_xy},      {"p0", opt.p0},
                       {"eps", opt.eps}};
    record_output(manifest, dir / "map.tile");
    write_manifest(dir, manifest);

    std::cout << "wrote " << map.size() << " cells to "
              << (dir / "map.tile").string() << "\n";
    return 0;
}

// ------------------------------------------------------------------- serve

struct ServeOptions {
    std::string map_dir;
    std::string bind = "127.0.0.1";
    std::uint16_t port = 0;
    std::string port_file;
};

void add_serve(CLI::App& app, ServeOptions& opt) {
    CLI::App* cmd = app.add_subcommand(
        "serve", "Publish every .tile in a directory over TCP until interrupted");
    cmd->add_option("--map-dir", opt.map_dir, "Directory of .tile files")
        ->required()
        ->envname("RISKTRACE_MAP_DIR");
    cmd->add_option("--bind", opt.bind, "Bind address")
        ->capture_default_str()
        ->envname("RISKTRACE_BIND");
    cmd->add_option("--port", opt.port, "Port (0 picks an ephemeral port)")
        ->capture_default_str();
    cmd->add_option("--port-file", opt.port_file,
                    "Write the chosen port here once listening");
}

std::atomic<bool> g_stop_requested{false};

void handle_stop_signal(int) { g_stop_requested.store(true); }

int run_serve(const ServeOptions& opt) {
    std::vector<fs::path> tiles;
    for (const fs::directory_entry& entry : fs::directory_iterator(opt.map_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".tile") {
            tiles.push_back(entry.path());
        }
    }
    std::sort(tiles.begin(), tiles.end());
    if (tiles.empty()) {
        throw Error("serve: no .tile files in " + opt.map_dir);
    }

    MapService service;
    for (const fs::path& tile : tiles) {
        const std::uint64_t version = service.publish(read_tile_file(tile));
        std::cout << "published " << tile.filename().string() << " as version "
                  << version << "\n";
    }

    TileServer server(service, opt.bind, opt.port);
    if (!opt.port_file.empty()) {
        write_text_file(opt.port_file, std::to_string(server.port()) + "\n");
    }
    std::cout << "serving " << tiles.size() << " version(s) on " << opt.bind << ":"
              << server.port() << "\n"
              << std::flush;

    std::signal(SIGINT, handle_stop_signal);
    std::signal(SIGTERM, handle_stop_signal);
    while (!g_stop_requested.load()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    server.stop();
    std::cout << "stopped\n";
    return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOptions {
    std::string tile;
    std::string endpoint;
    std::string trajectory_file;
    double threshold = kDefaultAdviseThreshold;
    std::string capture;
    MapRequest request{0,
                       std::numeric_limits<std::int32_t>::min(),
                       std::numeric_limits<std::int32_t>::max(),
                       std::numeric_limits<std::int32_t>::min(),
                       std::numeric_limits<std::int32_t>::max(),
                       std::numeric_limits<std::int64_t>::min(),
                       std::numeric_limits<std::int64_t>::max()};
};

void add_evaluate(CLI::App& app, EvaluateOptions& opt) {
    CLI::App* cmd = app.add_subcommand(
        "evaluate",
        "Score a locally held trajectory against a map tile or a map server");
    CLI::Option* tile = cmd->add_option("--tile", opt.tile, "Local .tile file");
    CLI::Option* endpoint =
        cmd->add_option("--endpoint", opt.endpoint, "Map server as host:port");
    tile->excludes(endpoint);
    endpoint->excludes(tile);
    cmd->add_option("--trajectory", opt.trajectory_file,
                    "Trajectory CSV; never leaves this process")
        ->required();
    cmd->add_option("--threshold", opt.threshold, "Test-advice risk threshold")
        ->capture_default_str()
        ->envname("RISKTRACE_THRESHOLD");
    cmd->add_option("--capture", opt.capture,
                    "Write all outbound request bytes to this file")
        ->needs(endpoint);
    cmd->add_option("--map-version", opt.request.map_version,
                    "Map version to request (0 = latest)")
        ->capture_default_str();
    cmd->add_option("--i-min", opt.request.i_min, "Tile window: min x index");
    cmd->add_option("--i-max", opt.request.i_max, "Tile window: max x index");
    cmd->add_option("--j-min", opt.request.j_min, "Tile window: min y index");
    cmd->add_option("--j-max", opt.request.j_max, "Tile window: max y index");
    cmd->add_option("--k-min", opt.request.k_min, "Tile window: min time index");
    cmd->add_option("--k-max", opt.request.k_max, "Tile window: max time index");
}

/// Pass-through transport that records every outbound byte, so a run can
/// prove what it sent.
class RecordingTransport : public Transport {
public:
    RecordingTransport(Transport& inner) : inner_(inner) {}
    void send_all(std::span<const std::uint8_t> bytes) override {
        sent_.insert(sent_.end(), bytes.begin(), bytes.end());
        inner_.send_all(bytes);
    }
    void recv_exact(std::span<std::uint8_t> buffer) override {
        inner_.recv_exact(buffer);
    }
    std::span<const std::uint8_t> sent() const { return sent_; }

private:
    Transport& inner_;
    std::vector<std::uint8_t> sent_;
};

int run_evaluate(const EvaluateOptions& opt) {
    if (opt.tile.empty() == opt.endpoint.empty()) {
        throw Error("evaluate: pass exactly one of --tile and --endpoint");
    }
    const Trajectory trajectory = load_trajectory(opt.trajectory_file);

    double risk = 0.0;
    bool advise = false;
    if (!opt.tile.empty()) {
        const RiskMap map = read_tile_file(opt.tile);
        risk = evaluate_trajectory(map, trajectory);
        advise = risk >= opt.threshold;
        std::cout << "risk " << format_double(risk) << "\n"
                  << "advise_test " << (advise ? "true" : "false") << "\n";
    } else {
        const std::size_t colon = opt.endpoint.rfind(':');
        if (colon == std::string::npos || colon == 0 ||
            colon + 1 == opt.endpoint.size()) {
            throw Error("evaluate: --endpoint must be host:port");
        }
        const std::string host = opt.endpoint.substr(0, colon);
        const int port = std::stoi(opt.endpoint.substr(colon + 1));
        if (port <= 0 || port > 65535) {
            throw Error("evaluate: port out of range");
        }
        TcpTransport tcp(host, static_cast<std::uint16_t>(port));
        RecordingTransport transport(tcp);
        const ClientResult result =
            client_evaluate(transport, opt.request, trajectory, opt.threshold);
        if (!opt.capture.empty()) {
            write_text_file(opt.capture,
                            std::string_view(reinterpret_cast<const char*>(
                                                 transport.sent().data()),
                                             transport.sent().size()));
        }
        risk = result.risk;
        advise = result.advise_test;
        std::cout << "risk " << format_double(risk) << "\n"
                  << "advise_test " << (advise ? "true" : "false") << "\n"
                  << "map_version " << result.map_version << "\n";
    }
    return advise ? 0 : 0;
}

// ------------------------------------------------------------------ refine

struct RefineOptions {
    std::string observations_file;
    std::vector<std::string> patient_files;
    double sigma_t = 100.0;
    double sigma_xy = 1.0;
    double p0 = RiskParams::default_p0();
    double eps = 1e-9;
    double prior_alpha = 0.0; // 0 = derive from sigma via centered_on
    double prior_beta = 0.0;
    double prior_alpha_t = 0.0;
    double prior_beta_t = 0.0;
    McmcConfig mcmc;
    std::uint64_t seed = 0;
    std::size_t map_samples = 50;
    std::string out;
};

void add_refine(CLI::App& app, RefineOptions& opt) {
    CLI::App* cmd = app.add_subcommand(
        "refine",
        "Refine the decay precisions from test outcomes and rebuild the map");
    cmd->add_option("--observations", opt.observations_file,
                    "CSV of trajectory_file,outcome (paths relative to the CSV)")
        ->required();
    cmd->add_option("patients", opt.patient_files, "Patient trajectory CSVs");
    cmd->add_option("--sigma-t", opt.sigma_t,
                    "Nominal temporal scale centering the prior")
        ->capture_default_str()
        ->envname("RISKTRACE_SIGMA_T");
    cmd->add_option("--sigma-xy", opt.sigma_xy,
                    "Nominal spatial scale centering the prior")
        ->capture_default_str()
        ->envname("RISKTRACE_SIGMA_XY");
    cmd->add_option("--p0", opt.p0, "Peak per-second infection probability")
        ->capture_default_str()
        ->envname("RISKTRACE_P0");
    cmd->add_option("--eps", opt.eps, "Refined-map truncation threshold")
        ->capture_default_str()
        ->envname("RISKTRACE_EPS");
    cmd->add_option("--prior-alpha", opt.prior_alpha, "Spatial prior shape");
    cmd->add_option("--prior-beta", opt.prior_beta, "Spatial prior rate");
    cmd->add_option("--prior-alpha-t", opt.prior_alpha_t, "Temporal prior shape");
    cmd->add_option("--prior-beta-t", opt.prior_beta_t, "Temporal prior rate");
    cmd->add_option("--iterations", opt.mcmc.iterations, "Total chain steps")
        ->capture_default_str();
    cmd->add_option("--burn-in", opt.mcmc.burn_in, "Discarded initial steps")
        ->capture_default_str();
    cmd->add_option("--thinning", opt.mcmc.thinning, "Keep every n-th step")
        ->capture_default_str();
    cmd->add_option("--proposal-scale", opt.mcmc.proposal_scale,
                    "Initial log-space proposal sd")
        ->capture_default_str();
    cmd->add_option("--seed", opt.seed, "Chain RNG seed")
        ->capture_default_str()
        ->envname("RISKTRACE_SEED");
    cmd->add_option("--map-samples", opt.map_samples,
                    "Max posterior samples averaged into the refined map")
        ->capture_default_str();
    cmd->add_option("--out", opt.out, "Output directory")
        ->required()
        ->envname("RISKTRACE_OUT");
}

std::vector<TestObservation> load_observations(const fs::path& file) {
    const CsvTable table = read_csv(file);
    require_columns(table, {"trajectory_file", "outcome"});
    const fs::path base = file.parent_path();
    std::vector<TestObservation> observations;
    observations.reserve(table.rows.size());
    for (const std::vector<std::string>& row : table.rows) {
        if (row[1] != "0" && row[1] != "1") {
            throw DomainError("observations: outcome must be 0 or 1, got " + row[1]);
        }
        TestObservation obs;
        fs::path trajectory(row[0]);
        if (trajectory.is_relative()) trajectory = base / trajectory;
        obs.trajectory = load_trajectory(trajectory);
        obs.outcome = row[1] == "1";
        observations.push_back(std::move(obs));
    }
    return observations;
}

nlohmann::json chain_summary(std::vector<double> values) {
    const double m = mean(values);
    return {{"mean", m},
            {"sd", values.size() > 1 ? sample_sd(values) : 0.0},
            {"ci90", {quantile(values, 0.05), quantile(values, 0.95)}}};
}

int run_refine(const RefineOptions& opt, const CLI::App& cmd) {
    const std::vector<TestObservation> observations =
        load_observations(opt.observations_file);
    const std::vector<Trajectory> patients = load_trajectories(opt.patient_files);
    const std::vector<PresenceCell> patient_cells = [&] {
        std::vector<PresenceCell> cells;
        for (const Trajectory& t : patients) {
            cells.insert(cells.end(), t.cells.begin(), t.cells.end());
        }
        return cells;
    }();

    PriorHyperparams prior = PriorHyperparams::centered_on(opt.sigma_xy, opt.sigma_t);
    if (cmd.count("--prior-alpha") > 0) prior.alpha = opt.prior_alpha;
    if (cmd.count("--prior-beta") > 0) prior.beta = opt.prior_beta;
    if (cmd.count("--prior-alpha-t") > 0) prior.alpha_t = opt.prior_alpha_t;
    if (cmd.count("--prior-beta-t") > 0) prior.beta_t = opt.prior_beta_t;

    const McmcResult result = sample_posterior(observations, patient_cells, prior,
                                               opt.p0, opt.mcmc, opt.seed);

    ensure_out_dir(opt.out);
    const fs::path dir(opt.out);

    std::string posterior_csv = "iteration,tau,tau_t,log_posterior\n";
    std::vector<double> taus, tau_ts;
    for (std::size_t n = 0; n < result.samples.size(); ++n) {
        const PosteriorSample& s = result.samples[n];
        posterior_csv += csv_line({std::to_string(opt.mcmc.burn_in + n * opt.mcmc.thinning),
                                   format_double(s.tau), format_double(s.tau_t),
                                   format_double(s.log_posterior)});
        posterior_csv += '\n';
        taus.push_back(s.tau);
        tau_ts.push_back(s.tau_t);
    }
    write_text_file(dir / "posterior.csv", posterior_csv);

    nlohmann::json summary;
    summary["tau"] = chain_summary(taus);
    summary["tau_t"] = chain_summary(tau_ts);
    summary["acceptance_rate"] = result.acceptance_rate;
    summary["samples"] = result.samples.size();
    write_text_file(dir / "summary.json", summary.dump(2) + "\n");

    // Refined map over an evenly spaced posterior subsample: map builds
    // dominate the cost, so cap how many go in.
    std::vector<PosteriorSample> subsample;
    const std::size_t stride =
        std::max<std::size_t>(1, (result.samples.size() + opt.map_samples - 1) /
                                     opt.map_samples);
    for (std::size_t n = 0; n < result.samples.size(); n += stride) {
        subsample.push_back(result.samples[n]);
    }
    const RiskMap refined =
        refined_risk_map(subsample, patients, kGrid, opt.p0, opt.eps);
    write_tile_file(dir / "refined.tile", refined);

    RunManifest manifest = RunManifest::for_command("refine", opt.seed);
    manifest.config = {{"observations", opt.observations_file},
                       {"patients", opt.patient_files},
                       {"sigma_t", opt.sigma_t},
                       {"sigma_xy", opt.sigma_xy},
                       {"p0", opt.p0},
                       {"eps", opt.eps},
                       {"prior_alpha", prior.alpha},
                       {"prior_beta", prior.beta},
                       {"prior_alpha_t", prior.alpha_t},
                       {"prior_beta_t", prior.beta_t},
                       {"iterations", opt.mcmc.iterations},
                       {"burn_in", opt.mcmc.burn_in},
                       {"thinning", opt.mcmc.thinning},
                       {"proposal_scale", opt.mcmc.proposal_scale},
                       {"seed", opt.seed},
                       {"map_samples", opt.map_samples}};
    record_output(manifest, dir / "posterior.csv");
    record_output(manifest, dir / "summary.json");
    record_output(manifest, dir / "refined.tile");
    write_manifest(dir, manifest);

    std::cout << "acceptance_rate " << format_double(result.acceptance_rate) << "\n"
              << "tau_mean " << format_double(mean(taus)) << "\n"
              << "tau_t_mean " << format_double(mean(tau_ts)) << "\n"
              << "refined_cells " << refined.size() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"risktrace: spatio-temporal infection risk maps"};
    app.require_subcommand(1);

    SimulateOptions simulate_opt;
    RocOptions roc_opt;
    BuildMapOptions build_map_opt;
    ServeOptions serve_opt;
    EvaluateOptions evaluate_opt;
    RefineOptions refine_opt;

    add_simulate(app, simulate_opt);
    add_roc(app, roc_opt);
    add_build_map(app, build_map_opt);
    add_serve(app, serve_opt);
    add_evaluate(app, evaluate_opt);
    add_refine(app, refine_opt);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("simulate")) return run_simulate(simulate_opt);
        if (app.got_subcommand("roc")) return run_roc(roc_opt);
        if (app.got_subcommand("build-map")) return run_build_map(build_map_opt);
        if (app.got_subcommand("serve")) return run_serve(serve_opt);
        if (app.got_subcommand("evaluate")) return run_evaluate(evaluate_opt);
        if (app.got_subcommand("refine")) {
            return run_refine(refine_opt, *app.get_subcommand("refine"));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
