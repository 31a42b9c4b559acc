#include "jced/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace jced {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double to_db(double linear) {
    return linear > 0.0 ? 10.0 * std::log10(linear) : kNan;
}

double median(std::vector<double> v) {
    v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
    if (v.empty()) return kNan;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// MAP state under the fitted prior given the true tap value.
std::vector<std::uint8_t> genie_states(std::span<const cplx> taps, const Gm2HmmPrior& prior) {
    std::vector<std::uint8_t> d(taps.size());
    for (std::size_t j = 0; j < taps.size(); ++j) {
        const double lam = prior.lambda[j];
        if (lam <= 0.0) {
            d[j] = 0;
            continue;
        }
        if (lam >= 1.0) {
            d[j] = 1;
            continue;
        }
        const double t = std::log(lam / (1.0 - lam)) + std::log(prior.nu0[j] / prior.nu1[j]) +
                         std::norm(taps[j]) * (1.0 / prior.nu0[j] - 1.0 / prior.nu1[j]);
        d[j] = t >= 0.0 ? 1 : 0;
    }
    return d;
}

struct CheckpointStat {
    long bit_errors = 0;
    double nmse = kNan;
};

struct AlgoTrialRecord {
    bool failed = false;
    CheckpointStat cp[3];  // turbo iterations 1, 2, fin
    int turbo_iters = 0;
    double total_ms = 0.0;
    std::string diag_json;
};

struct TrialPlan {
    FrameConfig frame_cfg;
    double sweep_value = 0.0;
    double ebn0_db = 0.0;
};

FrameConfig frame_for_point(const ExperimentSpec& spec, double value, double& ebn0_db) {
    FrameConfig fc;
    fc.n_subcarriers = spec.n;
    fc.n_taps = spec.l;
    fc.bits_per_symbol = spec.m;
    fc.n_pilots = spec.np;
    fc.n_training = spec.mt;
    fc.n_ofdm_symbols = spec.q;
    ebn0_db = spec.ebn0_db;
    if (spec.sweep == "ebn0_db") {
        ebn0_db = value;
    } else if (spec.sweep == "np") {
        fc.n_pilots = static_cast<int>(std::lround(value));
    } else if (spec.sweep == "mt") {
        fc.n_training = static_cast<int>(std::lround(value));
    } else {
        throw std::invalid_argument("harness: unknown sweep variable " + spec.sweep);
    }
    // Fixed spectral efficiency: R adjusts to eta * N / Md.
    fc.rate = spec.eta * fc.n_subcarriers / double(fc.data_bits());
    fc.noise_var = noise_variance_from_ebn0(ebn0_db, spec.eta);
    fc.validate();
    const double eta_check = fc.spectral_efficiency();
    if (std::abs(eta_check - spec.eta) > 1e-12)
        throw std::logic_error("harness: eta bookkeeping violated");
    return fc;
}

}  // namespace

std::string algo_name(Algo a) {
    switch (a) {
        case Algo::GampMc: return "gamp-mc";
        case Algo::Gamp: return "gamp";
        case Algo::Lmmse: return "lmmse";
        case Algo::Lasso: return "lasso";
        case Algo::Pcsi: return "pcsi";
        case Algo::Bsg: return "bsg";
    }
    throw std::logic_error("algo_name: bad enum");
}

Algo algo_from_name(const std::string& name) {
    if (name == "gamp-mc") return Algo::GampMc;
    if (name == "gamp") return Algo::Gamp;
    if (name == "lmmse") return Algo::Lmmse;
    if (name == "lasso") return Algo::Lasso;
    if (name == "pcsi") return Algo::Pcsi;
    if (name == "bsg") return Algo::Bsg;
    throw std::invalid_argument("unknown algorithm '" + name + "'");
}

ExperimentSpec ExperimentSpec::from_config(const Config& cfg) {
    ExperimentSpec s;
    s.n = static_cast<int>(cfg.get_int("n", s.n));
    s.l = static_cast<int>(cfg.get_int("l", s.l));
    s.m = static_cast<int>(cfg.get_int("m", s.m));
    s.np = static_cast<int>(cfg.get_int("np", s.np));
    s.mt = static_cast<int>(cfg.get_int("mt", s.mt));
    s.q = static_cast<int>(cfg.get_int("q", s.q));
    s.eta = cfg.get_double("eta", s.eta);
    s.ebn0_db = cfg.get_double("ebn0_db", s.ebn0_db);
    s.sweep = cfg.get_str("sweep", s.sweep);
    if (cfg.has("grid")) s.grid = cfg.get_list("grid");
    if (cfg.has("algos")) {
        s.algos.clear();
        std::istringstream in(cfg.get_str("algos"));
        std::string tok;
        while (std::getline(in, tok, ',')) {
            tok.erase(std::remove_if(tok.begin(), tok.end(), ::isspace), tok.end());
            if (!tok.empty()) s.algos.push_back(algo_from_name(tok));
        }
    }
    s.trials = static_cast<int>(cfg.get_int("trials", s.trials));
    s.master_seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
    s.workers = static_cast<int>(cfg.get_int("workers", 0));
    s.stable_timing = cfg.get_bool("stable_timing", false);

    s.receiver.max_turbo_iters = static_cast<int>(cfg.get_int("max_turbo_iters", 10));
    s.receiver.max_eq_iters = static_cast<int>(cfg.get_int("max_eq_iters", 5));
    s.receiver.max_gamp_iters = static_cast<int>(cfg.get_int("max_gamp_iters", 15));
    s.receiver.ldpc_iters = static_cast<int>(cfg.get_int("ldpc_iters", 25));
    s.receiver.turbo_llr_tol = cfg.get_double("turbo_llr_tol", 1e-2);
    s.receiver.eq_llr_tol_scale = cfg.get_double("eq_llr_tol_scale", 1e-4);
    s.receiver.gamp_tol_rel = cfg.get_double("gamp_tol_rel", 1e-6);
    s.receiver.gamp_clip = cfg.get_double("gamp_clip", 0.99);
    s.receiver.gamp_damping = cfg.get_double("gamp_damping", 0.0);
    s.receiver.hmm_posterior_feedback = cfg.get_bool("hmm_posterior_feedback", false);

    s.sv = SalehValenzuelaParams::from_config(cfg);
    s.pulses.rolloff = cfg.get_double("pulse_rolloff", 0.5);
    s.pulses.baud_interval = cfg.get_double("baud_ns") * 1e-9;
    s.pulses.truncation_halfwidth = static_cast<int>(cfg.get_int("pulse_trunc_halfwidth", 10));

    s.prior_file = cfg.get_str("prior_file", "");
    s.prior_fit_realizations = static_cast<int>(cfg.get_int("prior_fit_realizations", 3000));
    s.calib_realizations = static_cast<int>(cfg.get_int("calib_realizations", 2000));
    s.out_dir = cfg.get_str("out_dir", "out");
    s.write_diagnostics = cfg.get_bool("diagnostics", false);
    s.validate();
    return s;
}

void ExperimentSpec::validate() const {
    if (trials < 1) throw std::invalid_argument("experiment: trials must be >= 1");
    if (grid.empty()) throw std::invalid_argument("experiment: empty sweep grid");
    if (algos.empty()) throw std::invalid_argument("experiment: no algorithms");
    const bool both_positive = (sweep == "np" && mt > 0) || (sweep == "mt" && np > 0) ||
                               (sweep == "ebn0_db" && np > 0 && mt > 0);
    if (both_positive)
        throw std::invalid_argument("experiment: Np and Mt must not both be positive");
    receiver.validate();
    pulses.validate();
    sv.validate();
}

ChannelSetup prepare_channel(const ExperimentSpec& spec) {
    ChannelSetup setup;
    setup.sv = spec.sv;
    setup.pulses = spec.pulses;

    // Calibrate the generator so E{sum_j |x_j|^2} = 1 at length L.
    {
        Rng rng(derive_seed(spec.master_seed, 0xCA11B));
        double mean_energy = 0.0;
        for (int u = 0; u < spec.calib_realizations; ++u) {
            const auto paths = generate_impulse_response(setup.sv, rng);
            bool warn = false;
            const auto tv = sample_taps(paths, setup.pulses, spec.l, &warn);
            for (const auto& t : tv.taps) mean_energy += std::norm(t);
        }
        mean_energy /= double(spec.calib_realizations);
        if (mean_energy <= 0.0) throw std::runtime_error("calibration: zero channel energy");
        setup.sv.amplitude_scale = spec.sv.amplitude_scale / std::sqrt(mean_energy);
    }

    // Fit batch: PDP always, prior unless a file is given.
    {
        Rng rng(derive_seed(spec.master_seed, 0xF17));
        std::vector<TapVector> batch(spec.prior_fit_realizations);
        for (auto& tv : batch) {
            const auto paths = generate_impulse_response(setup.sv, rng);
            bool warn = false;
            tv = sample_taps(paths, setup.pulses, spec.l, &warn);
        }
        setup.pdp = estimate_pdp(batch);
        if (!spec.prior_file.empty()) {
            setup.prior = Gm2HmmPrior::load(spec.prior_file);
            if (static_cast<int>(setup.prior.length()) != spec.l)
                throw std::invalid_argument("prior file length != L");
        } else {
            auto rep = fit_gm2_hmm_prior(batch);
            setup.prior = std::move(rep.prior);
            setup.max_lambda_shift = rep.max_lambda_shift;
        }
    }
    return setup;
}

namespace {

AlgoTrialRecord run_algo_trial(const ExperimentSpec& spec, const ChannelSetup& setup,
                               const TrialPlan& plan, Algo algo, const Constellation& con,
                               const LdpcCode& code, const Frame& frame,
                               const std::vector<std::vector<cplx>>& taps,
                               const std::vector<std::vector<cplx>>& gains,
                               const std::vector<std::vector<cplx>>& y,
                               std::uint64_t ilv_seed, const TrialTruth& truth) {
    AlgoTrialRecord rec;
    const auto tic = std::chrono::steady_clock::now();

    if (algo == Algo::Bsg) {
        double err2 = 0.0, ref2 = 0.0;
        for (int q = 0; q < frame.cfg.n_ofdm_symbols; ++q) {
            const auto d = genie_states(taps[q], setup.prior);
            const auto xh = bsg_bound(y[q], frame.symbols[q], d, setup.prior.nu0, setup.prior.nu1,
                                      frame.cfg.noise_var);
            for (std::size_t j = 0; j < xh.size(); ++j) {
                err2 += std::norm(xh[j] - taps[q][j]);
                ref2 += std::norm(taps[q][j]);
            }
        }
        const double nmse = ref2 > 0.0 ? err2 / ref2 : kNan;
        for (auto& cp : rec.cp) cp = {0, nmse};
        rec.turbo_iters = 1;
        rec.total_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - tic)
                .count();
        return rec;
    }

    std::unique_ptr<SoftEqualizer> eq;
    switch (algo) {
        case Algo::GampMc:
            eq = std::make_unique<GampEqualizer>(setup.prior, con, frame.cfg.noise_var,
                                                 spec.receiver, true, frame.cfg.n_ofdm_symbols);
            break;
        case Algo::Gamp:
            eq = std::make_unique<GampEqualizer>(setup.prior, con, frame.cfg.noise_var,
                                                 spec.receiver, false, frame.cfg.n_ofdm_symbols);
            break;
        case Algo::Lmmse:
            eq = std::make_unique<LmmseEqualizer>(setup.pdp, con, frame.cfg.noise_var);
            break;
        case Algo::Lasso:
            eq = std::make_unique<LassoEqualizer>(setup.pdp, con, frame.cfg.noise_var, frame,
                                                  taps);
            break;
        case Algo::Pcsi:
            eq = std::make_unique<PcsiEqualizer>(gains);
            break;
        case Algo::Bsg:
            break;  // handled above
    }

    const auto res =
        run_receiver(y, frame, code, ilv_seed, *eq, spec.receiver, con, truth);
    rec.failed = res.failed;
    rec.turbo_iters = res.turbo_iters;
    if (!res.failed) {
        const int k = code.k;
        auto at = [&](int t) -> const TurboIterationDiag& {
            const int idx = std::min<int>(t, static_cast<int>(res.per_iteration.size())) - 1;
            return res.per_iteration[idx];
        };
        rec.cp[0] = {static_cast<long>(std::lround(at(1).ber * k)), at(1).nmse};
        rec.cp[1] = {static_cast<long>(std::lround(at(2).ber * k)), at(2).nmse};
        const auto& fin = res.per_iteration.back();
        rec.cp[2] = {static_cast<long>(std::lround(fin.ber * k)), fin.nmse};
    }
    rec.total_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - tic).count();

    if (spec.write_diagnostics) {
        nlohmann::json j;
        j["sweep_value"] = plan.sweep_value;
        j["algo"] = algo_name(algo);
        j["failed"] = res.failed;
        j["stop"] = res.stop_reason;
        j["turbo_iters"] = res.turbo_iters;
        j["total_ms"] = rec.total_ms;
        auto& arr = j["iterations"] = nlohmann::json::array();
        for (const auto& d : res.per_iteration) {
            nlohmann::json it;
            it["nmse"] = d.nmse;
            it["ber"] = d.ber;
            it["eq_iters"] = d.eq_iters;
            it["gamp_iters"] = d.gamp_iters;
            it["ms"] = d.millis;
            arr.push_back(it);
        }
        rec.diag_json = j.dump();
    }
    return rec;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentResult result;
    result.setup = prepare_channel(spec);
    const ChannelSetup& setup = result.setup;
    const Constellation con = build_constellation(spec.m);

    const int n_points = static_cast<int>(spec.grid.size());
    std::vector<TrialPlan> plans(n_points);
    std::vector<LdpcCode> codes(n_points);
    for (int p = 0; p < n_points; ++p) {
        plans[p].sweep_value = spec.grid[p];
        plans[p].frame_cfg = frame_for_point(spec, spec.grid[p], plans[p].ebn0_db);
        codes[p] = generate_code(plans[p].frame_cfg.coded_bits(), plans[p].frame_cfg.rate,
                                 derive_seed(spec.master_seed, 0xC0DE, p));
    }

    const int n_algos = static_cast<int>(spec.algos.size());
    const std::size_t n_tasks = std::size_t(n_points) * spec.trials;
    std::vector<std::vector<AlgoTrialRecord>> records(n_tasks);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t task = next.fetch_add(1);
            if (task >= n_tasks) return;
            const int p = static_cast<int>(task / spec.trials);
            const int trial = static_cast<int>(task % spec.trials);
            const TrialPlan& plan = plans[p];
            const FrameConfig& fc = plan.frame_cfg;

            const std::uint64_t base = derive_seed(spec.master_seed, p + 1, trial + 1);
            Rng chan_rng(derive_seed(base, 1));
            Rng bits_rng(derive_seed(base, 2));
            Rng frame_rng(derive_seed(base, 3));
            const std::uint64_t ilv_seed = derive_seed(base, 4);
            Rng noise_rng(derive_seed(base, 5));

            std::vector<std::vector<cplx>> taps(fc.n_ofdm_symbols), gains(fc.n_ofdm_symbols);
            for (int q = 0; q < fc.n_ofdm_symbols; ++q) {
                const auto paths = generate_impulse_response(setup.sv, chan_rng);
                bool warn = false;
                taps[q] = sample_taps(paths, setup.pulses, fc.n_taps, &warn).taps;
                gains[q] = subcarrier_gains(taps[q], fc.n_subcarriers);
            }

            std::vector<std::uint8_t> info(fc.info_bits());
            std::bernoulli_distribution coin(0.5);
            for (auto& b : info) b = coin(bits_rng);
            const auto codeword = encode(codes[p], info);
            const auto interleaved = interleave(codeword, ilv_seed);
            const Frame frame = assemble_frame(interleaved, fc, con, frame_rng);

            std::vector<std::vector<cplx>> y(fc.n_ofdm_symbols);
            for (int q = 0; q < fc.n_ofdm_symbols; ++q)
                y[q] = observe(frame.symbols[q], gains[q], fc.noise_var, noise_rng);

            TrialTruth truth{taps, info};
            auto& out = records[task];
            out.resize(n_algos);
            for (int a = 0; a < n_algos; ++a)
                out[a] = run_algo_trial(spec, setup, plan, spec.algos[a], con, codes[p], frame,
                                        taps, gains, y, ilv_seed, truth);
        }
    };

    int n_workers = spec.workers > 0 ? spec.workers
                                     : static_cast<int>(std::thread::hardware_concurrency());
    n_workers = std::max(1, std::min<int>(n_workers, static_cast<int>(n_tasks)));
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    // Deterministic aggregation in (point, algo, checkpoint) order.
    static const char* kCp[3] = {"1", "2", "fin"};
    for (int p = 0; p < n_points; ++p) {
        for (int a = 0; a < n_algos; ++a) {
            long ok_trials = 0, failures = 0;
            double iters_sum = 0.0, ms_sum = 0.0, iter_count = 0.0;
            for (int trial = 0; trial < spec.trials; ++trial) {
                const auto& rec = records[std::size_t(p) * spec.trials + trial][a];
                if (rec.failed) {
                    ++failures;
                    continue;
                }
                ++ok_trials;
                iters_sum += rec.turbo_iters;
                ms_sum += rec.total_ms;
                iter_count += rec.turbo_iters;
            }
            for (int c = 0; c < 3; ++c) {
                ResultRow row;
                row.sweep_value = plans[p].sweep_value;
                row.algo = algo_name(spec.algos[a]);
                row.iter = kCp[c];
                long errors = 0;
                double nmse_sum = 0.0;
                long nmse_n = 0;
                std::vector<double> nmse_each;
                for (int trial = 0; trial < spec.trials; ++trial) {
                    const auto& rec = records[std::size_t(p) * spec.trials + trial][a];
                    if (rec.failed) continue;
                    errors += rec.cp[c].bit_errors;
                    if (!std::isnan(rec.cp[c].nmse)) {
                        nmse_sum += rec.cp[c].nmse;
                        ++nmse_n;
                    }
                    nmse_each.push_back(rec.cp[c].nmse);
                }
                const long info_total = ok_trials * plans[p].frame_cfg.info_bits();
                row.ber = info_total > 0 ? double(errors) / double(info_total) : kNan;
                row.nmse_db = nmse_n > 0 ? to_db(nmse_sum / nmse_n) : kNan;
                row.nmse_med_db = to_db(median(nmse_each));
                row.time_per_turbo_ms = iter_count > 0 ? ms_sum / iter_count : kNan;
                row.turbo_iters_mean = ok_trials > 0 ? iters_sum / ok_trials : kNan;
                row.trials = static_cast<int>(ok_trials);
                row.failures = static_cast<int>(failures);
                result.rows.push_back(std::move(row));
            }
            if (ok_trials == 0) result.any_total_failure = true;
        }
    }

    if (spec.write_diagnostics)
        for (std::size_t t = 0; t < n_tasks; ++t)
            for (const auto& rec : records[t])
                if (!rec.diag_json.empty()) result.diagnostics.push_back(rec.diag_json);
    return result;
}

std::string csv_header() {
    return "sweep_value,algo,iter,ber,nmse_db,nmse_med_db,time_per_turbo_ms,turbo_iters_mean,"
           "trials,failures";
}

void write_csv(const std::string& path, const std::vector<ResultRow>& rows, bool stable_timing) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    out << csv_header() << '\n';
    char line[512];
    for (const auto& r : rows) {
        const double t_ms = stable_timing ? 0.0 : r.time_per_turbo_ms;
        std::snprintf(line, sizeof line, "%.10g,%s,%s,%.10g,%.6f,%.6f,%.3f,%.4f,%d,%d\n",
                      r.sweep_value, r.algo.c_str(), r.iter.c_str(), r.ber, r.nmse_db,
                      r.nmse_med_db, t_ms, r.turbo_iters_mean, r.trials, r.failures);
        out << line;
    }
    if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

void write_jsonl(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_jsonl: cannot open " + path);
    for (const auto& l : lines) out << l << '\n';
    if (!out) throw std::runtime_error("write_jsonl: write failed for " + path);
}

std::vector<ResultRow> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != csv_header())
        throw std::runtime_error("read_csv: bad header in " + path);
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string tok;
        ResultRow r;
        std::getline(row, tok, ',');
        r.sweep_value = std::stod(tok);
        std::getline(row, r.algo, ',');
        std::getline(row, r.iter, ',');
        std::getline(row, tok, ',');
        r.ber = std::stod(tok);
        std::getline(row, tok, ',');
        r.nmse_db = std::stod(tok);
        std::getline(row, tok, ',');
        r.nmse_med_db = std::stod(tok);
        std::getline(row, tok, ',');
        r.time_per_turbo_ms = std::stod(tok);
        std::getline(row, tok, ',');
        r.turbo_iters_mean = std::stod(tok);
        std::getline(row, tok, ',');
        r.trials = std::stoi(tok);
        std::getline(row, tok, ',');
        r.failures = std::stoi(tok);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace jced
